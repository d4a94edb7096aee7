"""From-scratch binary classifiers: logistic regression, random forest,
and a polynomial-kernel SVM trained by pairwise dual coordinate ascent."""

from .common import CLASSIFIER_KINDS, labels_from_binary, labels_to_binary
from .forest import ForestConfig, ForestModel, best_split, forest_importances, gini, train_forest
from .logreg import LogRegConfig, LogRegModel, logreg_gradient, logreg_loss, train_logreg
from .svm import SvmConfig, SvmModel, kernel_poly, train_svm
from .store import load_model, save_model
from .predict import predict_labels, predict_scores

__all__ = [
    "CLASSIFIER_KINDS",
    "ForestConfig",
    "ForestModel",
    "LogRegConfig",
    "LogRegModel",
    "SvmConfig",
    "SvmModel",
    "best_split",
    "forest_importances",
    "gini",
    "kernel_poly",
    "labels_from_binary",
    "labels_to_binary",
    "load_model",
    "logreg_gradient",
    "logreg_loss",
    "predict_labels",
    "predict_scores",
    "save_model",
    "train_forest",
    "train_logreg",
    "train_svm",
]
