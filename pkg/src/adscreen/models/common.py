"""Shared label conventions for the binary classifiers.

Class ``ad`` maps to 1 (or +1 for the SVM), ``cn`` to 0 (or -1). Every
deterministic tie rule resolves toward ``cn``: forest vote ties, a
logistic score of exactly 0.5, and an SVM decision value of exactly 0.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..corpus import CLASS_NEGATIVE, CLASS_POSITIVE
from ..errors import DataError

CLASSIFIER_KINDS = ("logreg", "rf", "svm")


def labels_to_binary(labels: Sequence[str], require_both: bool = True) -> np.ndarray:
    bad = sorted({lab for lab in labels if lab not in (CLASS_POSITIVE, CLASS_NEGATIVE)})
    if bad:
        raise DataError(f"unknown label(s): {', '.join(bad)}")
    y = np.array([1 if lab == CLASS_POSITIVE else 0 for lab in labels], dtype=np.int64)
    if require_both and (y.sum() == 0 or y.sum() == len(y)):
        raise DataError("training set must contain both classes")
    return y


def labels_from_binary(y: Sequence[int]) -> tuple[str, ...]:
    return tuple(CLASS_POSITIVE if v else CLASS_NEGATIVE for v in y)


def check_feature_width(expected: int, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.shape[1] != expected:
        raise DataError(
            f"feature width mismatch: model expects {expected}, got {X.shape[1]}"
        )
    return X


def check_training_matrix(X: np.ndarray) -> None:
    if not np.all(np.isfinite(X)):
        raise DataError(
            "training features contain missing or non-finite values; impute first"
        )
