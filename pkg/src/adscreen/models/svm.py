"""C-SVM with a degree-4 polynomial kernel, trained by pairwise SMO.

The dual is optimized by coordinate ascent on one (i, j) pair at a time:
the first index comes from a sweep over training rows whose KKT
violation exceeds the tolerance, the second is drawn from a seeded RNG.
Pair updates keep sum(alpha_i * y_i) = 0 exactly, so dual feasibility
holds at convergence by construction. When the usual second-derivative
step is degenerate (eta = 0, e.g. duplicated points), the pair objective
is evaluated at both clip ends and the better end is taken; this is what
drives contradictory duplicates to the C bound.

The final bias is recomputed as the mean over unbounded support vectors
(0 < alpha < C); if none exist it falls back to the midpoint of the
feasible interval implied by the bound-side KKT inequalities, and the
training report flags that.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..corpus import Dataset
from ..errors import DataError, NumericError
from .common import check_feature_width, check_training_matrix, labels_to_binary

ALPHA_EPS = 1e-8
MIN_STEP = 1e-12


def kernel_poly(
    x: np.ndarray,
    y: np.ndarray,
    gamma: float,
    coef0: float = 1.0,
    degree: int = 4,
) -> float:
    """(gamma * <x, y> + coef0) ** degree for two equal-length vectors."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise DataError(f"kernel dimension mismatch: {x.shape} vs {y.shape}")
    return float((gamma * np.dot(x, y) + coef0) ** degree)


def _kernel_matrix(
    A: np.ndarray, B: np.ndarray, gamma: float, coef0: float, degree: int
) -> np.ndarray:
    return (gamma * (A @ B.T) + coef0) ** degree


@dataclass(frozen=True)
class SvmConfig:
    C: float = 1.0
    degree: int = 4
    gamma: float | None = None  # default 1 / feature count
    coef0: float = 1.0
    tol: float = 1e-3  # KKT violation tolerance
    max_passes: int = 10  # consecutive sweeps without an update
    max_sweeps: int = 2000
    seed: int = 0


@dataclass(frozen=True)
class SvmModel:
    support_vectors: np.ndarray  # (n_sv, p)
    dual_coef: np.ndarray  # alpha_i * y_i per support vector
    bias: float
    gamma: float
    config: SvmConfig
    feature_names: tuple[str, ...]
    bias_rule: str = "unbounded-mean"
    converged: bool = True
    constraint_residual: float = 0.0  # |sum alpha_i y_i| at convergence

    @property
    def kind(self) -> str:
        return "svm"

    def scores(self, X: np.ndarray) -> np.ndarray:
        """Decision-function values; positive side is class ad."""
        X = check_feature_width(len(self.feature_names), X)
        K = _kernel_matrix(
            X, self.support_vectors, self.gamma, self.config.coef0, self.config.degree
        )
        return K @ self.dual_coef + self.bias


def _pair_objective_end(alpha1, alpha2, y1, y2, e1, e2, b, k11, k22, k12, end):
    """Platt's single-pair objective evaluated with alpha2 at a clip end."""
    s = y1 * y2
    f1 = y1 * (e1 + b) - alpha1 * k11 - s * alpha2 * k12
    f2 = y2 * (e2 + b) - s * alpha1 * k12 - alpha2 * k22
    a1_end = alpha1 + s * (alpha2 - end)
    return (
        a1_end * f1
        + end * f2
        + 0.5 * a1_end * a1_end * k11
        + 0.5 * end * end * k22
        + s * end * a1_end * k12
    )


def train_svm(train: Dataset, config: SvmConfig | None = None) -> SvmModel:
    config = config or SvmConfig()
    check_training_matrix(train.table.values)
    y01 = labels_to_binary(train.labels)
    y = (2 * y01 - 1).astype(np.float64)
    X = train.table.values
    n, p = X.shape
    gamma = config.gamma if config.gamma is not None else 1.0 / p
    C = config.C
    if C <= 0:
        raise DataError(f"C must be positive, got {C}")
    K = _kernel_matrix(X, X, gamma, config.coef0, config.degree)
    if not np.all(np.isfinite(K)):
        raise NumericError("kernel matrix contains non-finite values")

    rng = np.random.default_rng(config.seed)
    alpha = np.zeros(n)
    b = 0.0
    passes = 0
    sweeps = 0
    converged = False

    def decision(i: int) -> float:
        return float(K[i] @ (alpha * y) + b)

    while passes < config.max_passes and sweeps < config.max_sweeps:
        sweeps += 1
        changed = 0
        for i in range(n):
            e_i = decision(i) - y[i]
            r_i = y[i] * e_i
            if not ((r_i < -config.tol and alpha[i] < C) or (r_i > config.tol and alpha[i] > 0)):
                continue
            j = int(rng.integers(0, n - 1))
            if j >= i:
                j += 1
            e_j = decision(j) - y[j]
            a_i_old, a_j_old = alpha[i], alpha[j]
            if y[i] != y[j]:
                low = max(0.0, a_j_old - a_i_old)
                high = min(C, C + a_j_old - a_i_old)
            else:
                low = max(0.0, a_i_old + a_j_old - C)
                high = min(C, a_i_old + a_j_old)
            if high - low < MIN_STEP:
                continue
            eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
            if eta > 0:
                a_j = a_j_old + y[j] * (e_i - e_j) / eta
                a_j = min(max(a_j, low), high)
            else:
                # degenerate curvature: evaluate the pair objective at both ends
                obj_low = _pair_objective_end(
                    a_i_old, a_j_old, y[i], y[j], e_i, e_j, b,
                    K[i, i], K[j, j], K[i, j], low,
                )
                obj_high = _pair_objective_end(
                    a_i_old, a_j_old, y[i], y[j], e_i, e_j, b,
                    K[i, i], K[j, j], K[i, j], high,
                )
                if obj_low < obj_high - 1e-12:
                    a_j = low
                elif obj_low > obj_high + 1e-12:
                    a_j = high
                else:
                    continue
            if abs(a_j - a_j_old) < MIN_STEP:
                continue
            a_i = a_i_old + y[i] * y[j] * (a_j_old - a_j)
            # pair update keeps sum(alpha * y) invariant; clip float dust
            a_i = min(max(a_i, 0.0), C)
            b1 = (
                b - e_i
                - y[i] * (a_i - a_i_old) * K[i, i]
                - y[j] * (a_j - a_j_old) * K[i, j]
            )
            b2 = (
                b - e_j
                - y[i] * (a_i - a_i_old) * K[i, j]
                - y[j] * (a_j - a_j_old) * K[j, j]
            )
            if 0.0 < a_i < C:
                b = b1
            elif 0.0 < a_j < C:
                b = b2
            else:
                b = (b1 + b2) / 2.0
            alpha[i], alpha[j] = a_i, a_j
            changed += 1
        passes = passes + 1 if changed == 0 else 0
    converged = passes >= config.max_passes

    margins = K @ (alpha * y)  # decision values without bias
    unbounded = (alpha > ALPHA_EPS * C) & (alpha < C * (1.0 - ALPHA_EPS))
    if unbounded.any():
        bias = float(np.mean(y[unbounded] - margins[unbounded]))
        bias_rule = "unbounded-mean"
    else:
        # KKT at the bounds brackets the bias; take the interval midpoint
        b_candidates = y - margins
        lower_set = ((alpha <= ALPHA_EPS * C) & (y > 0)) | (
            (alpha >= C * (1.0 - ALPHA_EPS)) & (y < 0)
        )
        upper_set = ((alpha <= ALPHA_EPS * C) & (y < 0)) | (
            (alpha >= C * (1.0 - ALPHA_EPS)) & (y > 0)
        )
        lo = b_candidates[lower_set].max() if lower_set.any() else b_candidates.min()
        hi = b_candidates[upper_set].min() if upper_set.any() else b_candidates.max()
        bias = float((lo + hi) / 2.0)
        bias_rule = "bounded-midpoint"

    residual = float(abs(np.sum(alpha * y)))
    keep = alpha > ALPHA_EPS * C
    return SvmModel(
        support_vectors=X[keep].copy(),
        dual_coef=(alpha * y)[keep],
        bias=bias,
        gamma=gamma,
        config=config,
        feature_names=train.table.column_names,
        bias_rule=bias_rule,
        converged=converged,
        constraint_residual=residual,
    )
