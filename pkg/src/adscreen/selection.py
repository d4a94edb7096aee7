"""Recursive feature elimination down to a target column count.

Each round refits the scoring estimator on the surviving columns
(re-standardized every round so weight magnitudes stay comparable),
ranks features by importance, and drops the ``step`` weakest.
Importance ties drop the higher column index first. The default scorer
is L2 logistic regression coefficient magnitude; a forest-importance
scorer is available as an alternative. The scorer uses a short, fast
training configuration since only the importance ordering matters.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .corpus import Dataset, FeatureTable
from .errors import DataError, UsageError
from .models.forest import ForestConfig, forest_importances, train_forest
from .models.logreg import LogRegConfig, fit_logreg_arrays
from .models.common import labels_to_binary

RFE_SCORERS = ("logreg", "rf")

# ranking only needs the importance order, not a converged model
SCORER_LOGREG = LogRegConfig(learning_rate=0.3, epochs=200, l2=1e-2, tol=1e-4)
SCORER_FOREST = ForestConfig(n_trees=30, max_depth=8)


@dataclass(frozen=True)
class FeatureMask:
    """Kept column names plus the elimination round of every column.

    Kept features share rank 0; higher rank means dropped earlier.
    """

    kept: tuple[str, ...]
    ranking: Mapping[str, int]

    def __post_init__(self) -> None:
        for name in self.kept:
            if self.ranking.get(name, -1) != 0:
                raise DataError(f"kept feature {name!r} must have rank 0")


def _importances(X: np.ndarray, y01: np.ndarray, scorer: str, seed: int) -> np.ndarray:
    mean = X.mean(axis=0)
    sigma = X.std(axis=0)
    Xs = (X - mean) / np.where(sigma < 1e-12, 1.0, sigma)
    if scorer == "logreg":
        w, _, _ = fit_logreg_arrays(Xs, y01, SCORER_LOGREG)
        return np.abs(w)
    if scorer == "rf":
        table = FeatureTable(
            ids=tuple(f"r{i}" for i in range(len(Xs))),
            column_names=tuple(f"c{j}" for j in range(Xs.shape[1])),
            values=Xs,
        )
        labels = tuple("ad" if v else "cn" for v in y01)
        cfg = ForestConfig(
            n_trees=SCORER_FOREST.n_trees, max_depth=SCORER_FOREST.max_depth, seed=seed
        )
        model = train_forest(Dataset(table=table, labels=labels), cfg)
        return forest_importances(model)
    raise UsageError(f"unknown rfe scorer {scorer!r}; expected one of {RFE_SCORERS}")


def rfe(
    train: Dataset,
    target_count: int,
    step: int = 1,
    seed: int = 0,
    scorer: str = "logreg",
) -> FeatureMask:
    """Eliminate features round by round until ``target_count`` remain."""
    p = train.table.width
    if not 1 <= target_count <= p:
        raise UsageError(f"target_count must be in [1, {p}], got {target_count}")
    if step < 1:
        raise UsageError(f"step must be >= 1, got {step}")
    y01 = labels_to_binary(train.labels)
    if np.isnan(train.table.values).any():
        raise DataError("rfe input contains missing values; impute first")

    names = train.table.column_names
    surviving = list(range(p))
    dropped_by_round: list[list[int]] = []
    while len(surviving) > target_count:
        X = train.table.values[:, surviving]
        importance = _importances(X, y01, scorer, seed + len(dropped_by_round))
        k = min(step, len(surviving) - target_count)
        # weakest first; ties drop the higher original column index first
        order = sorted(
            range(len(surviving)),
            key=lambda j: (importance[j], -surviving[j]),
        )
        drop_local = sorted(order[:k], reverse=True)
        dropped_by_round.append([surviving[j] for j in drop_local])
        for j in drop_local:
            surviving.pop(j)

    total_rounds = len(dropped_by_round)
    ranking = {name: 0 for name in names}
    for round_no, cols in enumerate(dropped_by_round, start=1):
        for col in cols:
            ranking[names[col]] = total_rounds - round_no + 1
    kept = tuple(names[j] for j in sorted(surviving))
    return FeatureMask(kept=kept, ranking=ranking)


def apply_mask(mask: FeatureMask, table: FeatureTable) -> FeatureTable:
    """Project a table onto the mask's kept columns, in mask order."""
    return table.subset_columns(mask.kept)


def save_mask(mask: FeatureMask, csv_path: str | Path) -> None:
    path = Path(csv_path)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write("feature,rank\n")
        for name in mask.ranking:
            handle.write(f"{name},{mask.ranking[name]}\n")


def load_mask(csv_path: str | Path) -> FeatureMask:
    path = Path(csv_path)
    if not path.is_file():
        raise DataError(f"mask file not found: {path}")
    ranking: dict[str, int] = {}
    with path.open(encoding="utf-8") as handle:
        header = handle.readline().rstrip("\n")
        if header != "feature,rank":
            raise DataError(f"{path}: expected header 'feature,rank'")
        for line_no, line in enumerate(handle, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                name, rank = line.rsplit(",", 1)
                ranking[name] = int(rank)
            except ValueError:
                raise DataError(f"{path}:{line_no}: malformed mask row {line!r}") from None
    kept = tuple(name for name, rank in ranking.items() if rank == 0)
    if not kept:
        raise DataError(f"{path}: mask keeps no features")
    return FeatureMask(kept=kept, ranking=ranking)
