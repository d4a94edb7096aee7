"""Label prediction across the three classifier kinds.

Scores: logistic probability of ad, forest mean leaf probability of ad,
SVM decision-function value. Label rules: forest majority vote with ties
to cn; logistic threshold strictly above 0.5; SVM strictly positive
decision value. All ties therefore resolve to cn.
"""

from __future__ import annotations

import numpy as np

from ..corpus import CLASS_NEGATIVE, CLASS_POSITIVE
from ..errors import DataError
from .forest import ForestModel
from .logreg import LogRegModel
from .svm import SvmModel

TrainedModel = LogRegModel | ForestModel | SvmModel


def predict_scores(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    return model.scores(X)


def predict_labels(model: TrainedModel, X: np.ndarray) -> tuple[str, ...]:
    if isinstance(model, ForestModel):
        votes = model.tree_votes(X)
        ad_votes = votes.sum(axis=1)
        is_ad = 2 * ad_votes > votes.shape[1]
    elif isinstance(model, LogRegModel):
        is_ad = model.scores(X) > 0.5
    elif isinstance(model, SvmModel):
        is_ad = model.scores(X) > 0.0
    else:
        raise DataError(f"unknown model type {type(model).__name__}")
    return tuple(CLASS_POSITIVE if flag else CLASS_NEGATIVE for flag in is_ad)
