"""L2-regularized logistic regression trained by full-batch gradient descent.

Loss = mean negative log-likelihood + (l2/2) * ||w||^2 (bias unpenalized).
Weights start at zero, so an untrained model scores 0.5 everywhere.
Training stops at the epoch limit or when the gradient infinity-norm
drops below the tolerance. Probabilities are clamped to
[1e-12, 1 - 1e-12] before any log.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..corpus import Dataset
from ..errors import NumericError
from .common import check_feature_width, check_training_matrix, labels_to_binary

PROB_FLOOR = 1e-12


def sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500.0, 500.0)))


def logreg_loss(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, l2: float) -> float:
    p = np.clip(sigmoid(X @ w + b), PROB_FLOOR, 1.0 - PROB_FLOOR)
    nll = -np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))
    return float(nll + 0.5 * l2 * np.dot(w, w))


def logreg_gradient(
    w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, l2: float
) -> tuple[np.ndarray, float]:
    p = sigmoid(X @ w + b)
    residual = p - y
    # axis-0 reduction instead of BLAS X.T @ residual: identical feature
    # columns then get bit-identical gradients regardless of column
    # position, which keeps duplicate-feature ties exact (the elimination
    # tie rule depends on that)
    grad_w = (X * residual[:, None]).sum(axis=0) / len(y) + l2 * w
    grad_b = float(residual.mean())
    return grad_w, grad_b


@dataclass(frozen=True)
class LogRegConfig:
    learning_rate: float = 0.1
    epochs: int = 2000
    l2: float = 1e-3
    tol: float = 1e-6
    seed: int = 0  # echoed in saved models; training itself is deterministic


@dataclass(frozen=True)
class LogRegModel:
    weights: np.ndarray
    bias: float
    config: LogRegConfig
    feature_names: tuple[str, ...]
    loss_history: tuple[float, ...] = field(repr=False, default=())

    @property
    def kind(self) -> str:
        return "logreg"

    def scores(self, X: np.ndarray) -> np.ndarray:
        X = check_feature_width(len(self.weights), X)
        return sigmoid(X @ self.weights + self.bias)


def fit_logreg_arrays(
    X: np.ndarray, y: np.ndarray, config: LogRegConfig
) -> tuple[np.ndarray, float, list[float]]:
    """Low-level fit on a 0/1 target; returns (weights, bias, loss history)."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = np.zeros(X.shape[1])
    b = 0.0
    history = [logreg_loss(w, b, X, y, config.l2)]
    for _ in range(config.epochs):
        grad_w, grad_b = logreg_gradient(w, b, X, y, config.l2)
        w = w - config.learning_rate * grad_w
        b = b - config.learning_rate * grad_b
        loss = logreg_loss(w, b, X, y, config.l2)
        if not np.isfinite(loss) or not np.all(np.isfinite(w)):
            raise NumericError(
                "logistic regression diverged (non-finite loss); "
                "try a smaller learning rate"
            )
        history.append(loss)
        if max(np.abs(grad_w).max(initial=0.0), abs(grad_b)) < config.tol:
            break
    return w, b, history


def train_logreg(train: Dataset, config: LogRegConfig | None = None) -> LogRegModel:
    config = config or LogRegConfig()
    check_training_matrix(train.table.values)
    y = labels_to_binary(train.labels)
    w, b, history = fit_logreg_arrays(train.table.values, y, config)
    return LogRegModel(
        weights=w,
        bias=b,
        config=config,
        feature_names=train.table.column_names,
        loss_history=tuple(history),
    )
