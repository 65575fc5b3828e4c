"""Ridge regression (the learner behind every strategy) and the two metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import spd_solve

__all__ = ["RidgeModel", "ridge_fit", "predict", "rmse", "pearson_cc"]

DEFAULT_RIDGE_SIGMA = 0.01


@dataclass(frozen=True)
class RidgeModel:
    """A fitted linear model with its regularization strength."""

    weights: np.ndarray
    bias: float
    sigma: float

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        if weights.ndim != 1 or not np.all(np.isfinite(weights)):
            raise ValueError("weights must be a finite vector")
        if not math.isfinite(self.bias):
            raise ValueError("bias must be finite")
        if self.sigma < 0.0:
            raise ValueError("sigma must be non-negative")
        weights = np.ascontiguousarray(weights)
        weights.flags.writeable = False
        object.__setattr__(self, "weights", weights)


def ridge_fit(X, y, sigma: float = DEFAULT_RIDGE_SIGMA, fit_bias: bool = True) -> RidgeModel:
    """Fit ridge regression via the normal equations.

    The bias is handled by augmenting a constant column and penalizing it
    together with the weights, which keeps the system positive-definite even
    for rank-deficient design matrices.  ``sigma = 0`` is accepted only when
    the unregularized normal equations are nonsingular.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be a 2-D matrix")
    n, d = X.shape
    if n < 1 or d < 1:
        raise ValueError("need at least one sample and one feature")
    if y.shape != (n,):
        raise ValueError("y must match the rows of X")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("inputs must be finite")
    if sigma < 0.0:
        raise ValueError("sigma must be non-negative")
    A = np.hstack([X, np.ones((n, 1))]) if fit_bias else X
    G = A.T @ A + sigma * np.eye(A.shape[1])
    G = (G + G.T) / 2.0
    coeffs = spd_solve(G, A.T @ y)
    if fit_bias:
        return RidgeModel(coeffs[:d], float(coeffs[d]), float(sigma))
    return RidgeModel(coeffs, 0.0, float(sigma))


def predict(model: RidgeModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.weights.shape[0]:
        raise ValueError("feature count does not match the model")
    return X @ model.weights + model.bias


def rmse(y, yhat) -> float:
    """Root mean squared error."""
    y = np.asarray(y, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    if y.shape != yhat.shape or y.ndim != 1 or y.size < 1:
        raise ValueError("inputs must be equal-length vectors")
    return float(np.sqrt(np.mean((y - yhat) ** 2)))


def pearson_cc(y, yhat) -> tuple[float, bool]:
    """Sample Pearson correlation.

    Returns ``(cc, degenerate)``; a constant input on either side yields
    ``(0.0, True)`` so that early near-constant models stay aggregatable.
    """
    y = np.asarray(y, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    if y.shape != yhat.shape or y.ndim != 1:
        raise ValueError("inputs must be equal-length vectors")
    if y.size < 2:
        raise ValueError("correlation needs at least two observations")
    dy = y - y.mean()
    dyh = yhat - yhat.mean()
    ssy = float(dy @ dy)
    ssyh = float(dyh @ dyh)
    if ssy == 0.0 or ssyh == 0.0:
        return 0.0, True
    r = float(dy @ dyh) / math.sqrt(ssy * ssyh)
    return max(-1.0, min(1.0, r)), False
