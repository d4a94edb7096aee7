"""Random forest with Gini-impurity splitting on bootstrap samples.

Split scoring is exact: candidate comparisons use integer arithmetic on
label counts, so the chosen (feature, threshold) is independent of
floating-point summation order and ties resolve deterministically to the
lower feature index, then the lower threshold. Candidate thresholds sit
at midpoints of consecutive distinct sorted feature values; a split must
strictly reduce the weighted impurity or the node stays a leaf.

Each tree draws its bootstrap sample and per-split feature subsets from
its own RNG stream seeded with (master seed + tree index), so tree
training order can never change results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..corpus import Dataset
from ..errors import DataError
from .common import check_feature_width, check_training_matrix, labels_to_binary

__all__ = [
    "ForestConfig",
    "ForestModel",
    "TreeNode",
    "best_split",
    "forest_importances",
    "gini",
    "train_forest",
]


def gini(class_probs: Sequence[float]) -> float:
    """Impurity 1 - sum(p_i^2) of a class-probability vector."""
    p = np.asarray(class_probs, dtype=np.float64)
    if p.size == 0 or (p < 0).any():
        raise DataError("class probabilities must be non-negative")
    if abs(p.sum() - 1.0) > 1e-9:
        raise DataError(f"class probabilities sum to {p.sum()}, expected 1")
    return float(1.0 - np.sum(p * p))


def _impurity_terms(n_left, c1_left, n, c1_total):
    """Integer numerators A = n_side^2 - c0^2 - c1^2 (= n_side^2 * gini)."""
    c0_left = n_left - c1_left
    n_right = n - n_left
    c1_right = c1_total - c1_left
    c0_right = n_right - c1_right
    a_left = n_left * n_left - c0_left * c0_left - c1_left * c1_left
    a_right = n_right * n_right - c0_right * c0_right - c1_right * c1_right
    return a_left, a_right, n_right


def best_split(
    X: np.ndarray,
    y: np.ndarray,
    candidate_features: Sequence[int],
    min_leaf: int = 1,
) -> tuple[int, float] | None:
    """Minimize child-size-weighted Gini over candidate (feature, midpoint) splits.

    Rows with feature value <= threshold go left. Returns None when no
    candidate strictly reduces impurity (or no distinct values exist).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n = len(y)
    if n < 2:
        return None
    c1_total = int(y.sum())
    parent_a = n * n - (n - c1_total) ** 2 - c1_total**2
    if parent_a == 0:
        return None  # pure node

    # best score as an exact rational: s = a_l/n_l + a_r/n_r, compared
    # via s1 < s2  <=>  num1 * den2 < num2 * den1 over den = n_l * n_r
    best_num = best_den = None
    best_feature = best_threshold = None
    for f in sorted(set(int(c) for c in candidate_features)):
        col = X[:, f]
        order = np.argsort(col, kind="stable")
        col_s = col[order]
        cum1 = np.cumsum(y[order])
        boundary = np.nonzero(col_s[:-1] < col_s[1:])[0]
        if boundary.size == 0:
            continue
        n_left = boundary + 1
        keep = (n_left >= min_leaf) & (n - n_left >= min_leaf)
        boundary = boundary[keep]
        if boundary.size == 0:
            continue
        n_left = n_left[keep]
        c1_left = cum1[boundary]
        a_left, a_right, n_right = _impurity_terms(n_left, c1_left, n, c1_total)
        nums = a_left * n_right + a_right * n_left
        dens = n_left * n_right
        # fast float pass, then exact integer comparison near the minimum
        scores = nums / dens
        m = scores.min()
        tol = 1e-9 * (1.0 + abs(m))
        for k in np.nonzero(scores <= m + tol)[0]:
            num, den = int(nums[k]), int(dens[k])
            i = int(boundary[k])
            threshold = (col_s[i] + col_s[i + 1]) / 2.0
            if best_num is None or num * best_den < best_num * den:
                best_num, best_den = num, den
                best_feature, best_threshold = f, threshold
    if best_num is None:
        return None
    # strict improvement: weighted_gini < parent_gini <=> num * n < parent_a * den
    if not best_num * n < parent_a * best_den:
        return None
    return best_feature, float(best_threshold)


@dataclass(frozen=True)
class TreeNode:
    probs: tuple[float, float]  # (p_cn, p_ad), sums to 1
    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: int = 12
    min_samples_leaf: int = 2
    features_per_split: int | None = None  # default ceil(sqrt(p))
    seed: int = 0


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[TreeNode, ...]
    config: ForestConfig
    feature_names: tuple[str, ...]
    importances: tuple[float, ...] = ()

    @property
    def kind(self) -> str:
        return "rf"

    def tree_votes(self, X: np.ndarray) -> np.ndarray:
        """(n_rows, n_trees) matrix of per-tree class votes (0=cn, 1=ad)."""
        X = check_feature_width(len(self.feature_names), X)
        votes = np.zeros((X.shape[0], len(self.trees)), dtype=np.int64)
        for t, tree in enumerate(self.trees):
            for i, row in enumerate(X):
                probs = _leaf_probs(tree, row)
                votes[i, t] = 1 if probs[1] > probs[0] else 0
        return votes

    def scores(self, X: np.ndarray) -> np.ndarray:
        """Mean over trees of the leaf probability of class ad."""
        X = check_feature_width(len(self.feature_names), X)
        out = np.zeros(X.shape[0])
        for tree in self.trees:
            for i, row in enumerate(X):
                out[i] += _leaf_probs(tree, row)[1]
        return out / len(self.trees)


def _leaf_probs(node: TreeNode, row: np.ndarray) -> tuple[float, float]:
    while not node.is_leaf:
        node = node.left if row[node.feature] <= node.threshold else node.right
    return node.probs


def _build_tree(
    X: np.ndarray,
    y: np.ndarray,
    rng: np.random.Generator,
    config: ForestConfig,
    n_candidates: int,
    depth: int,
    n_root: int,
    importances: np.ndarray,
) -> TreeNode:
    n = len(y)
    c1 = int(y.sum())
    probs = ((n - c1) / n, c1 / n)
    if depth >= config.max_depth or c1 in (0, n) or n < 2 * config.min_samples_leaf:
        return TreeNode(probs=probs)
    p = X.shape[1]
    candidates = np.sort(rng.choice(p, size=min(n_candidates, p), replace=False))
    split = best_split(X, y, candidates, min_leaf=config.min_samples_leaf)
    if split is None:
        return TreeNode(probs=probs)
    feature, threshold = split
    mask = X[:, feature] <= threshold
    gini_parent = 1.0 - probs[0] ** 2 - probs[1] ** 2
    n_l, n_r = int(mask.sum()), int((~mask).sum())
    c1_l = int(y[mask].sum())
    c1_r = c1 - c1_l
    gini_l = 1.0 - ((n_l - c1_l) / n_l) ** 2 - (c1_l / n_l) ** 2
    gini_r = 1.0 - ((n_r - c1_r) / n_r) ** 2 - (c1_r / n_r) ** 2
    importances[feature] += (n / n_root) * (
        gini_parent - (n_l * gini_l + n_r * gini_r) / n
    )
    left = _build_tree(
        X[mask], y[mask], rng, config, n_candidates, depth + 1, n_root, importances
    )
    right = _build_tree(
        X[~mask], y[~mask], rng, config, n_candidates, depth + 1, n_root, importances
    )
    return TreeNode(
        probs=probs, feature=feature, threshold=threshold, left=left, right=right
    )


def train_forest(train: Dataset, config: ForestConfig | None = None) -> ForestModel:
    config = config or ForestConfig()
    check_training_matrix(train.table.values)
    y = labels_to_binary(train.labels)
    X = train.table.values
    n, p = X.shape
    n_candidates = config.features_per_split or math.ceil(math.sqrt(p))
    trees = []
    importances = np.zeros(p)
    for t in range(config.n_trees):
        rng = np.random.default_rng(config.seed + t)
        sample = rng.integers(0, n, size=n)
        trees.append(
            _build_tree(
                X[sample], y[sample], rng, config, n_candidates, 0, n, importances
            )
        )
    return ForestModel(
        trees=tuple(trees),
        config=config,
        feature_names=train.table.column_names,
        importances=tuple(importances / config.n_trees),
    )


def forest_importances(model: ForestModel) -> np.ndarray:
    """Mean impurity decrease per feature, normalized to sum to 1."""
    raw = np.array(model.importances)
    total = raw.sum()
    return raw / total if total > 0 else raw
