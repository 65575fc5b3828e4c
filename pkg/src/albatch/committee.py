"""Bootstrap ridge committees and the disagreement-based informativeness scores."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .regression import RidgeModel, predict, ridge_fit

__all__ = [
    "CommitteePredictions",
    "bootstrap_committee",
    "committee_predict",
    "qbc_scores",
    "emcm_scores",
]

DEFAULT_COMMITTEE_SIZE = 4
_MAX_RESAMPLE_ATTEMPTS = 10


@dataclass(frozen=True)
class CommitteePredictions:
    """Candidate-by-model prediction matrix from a bootstrap committee."""

    preds: np.ndarray

    def __post_init__(self):
        preds = np.asarray(self.preds, dtype=float)
        if preds.ndim != 2 or preds.shape[1] < 2:
            raise ValueError("predictions must be a matrix with at least two committee columns")
        if not np.all(np.isfinite(preds)):
            raise ValueError("predictions contain non-finite values")
        preds = np.ascontiguousarray(preds)
        preds.flags.writeable = False
        object.__setattr__(self, "preds", preds)

    @property
    def committee_size(self) -> int:
        return self.preds.shape[1]


def bootstrap_committee(X, y, committee_size: int = DEFAULT_COMMITTEE_SIZE,
                        sigma: float = 0.01, seed: int = 0) -> list[RidgeModel]:
    """Fit one ridge model per with-replacement resample of the labeled set.

    Resamples that collapse onto fewer than two distinct samples are redrawn
    a few times and then accepted; the ridge penalty keeps the fit well-posed
    either way.  Deterministic per seed.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    if n < 2:
        raise ValueError("need at least two labeled samples to bootstrap a committee")
    if committee_size < 2:
        raise ValueError("a committee needs at least two models")
    rng = np.random.default_rng(seed)
    models = []
    for _ in range(committee_size):
        for _ in range(_MAX_RESAMPLE_ATTEMPTS):
            idx = rng.integers(0, n, size=n)
            if np.unique(idx).size >= 2:
                break
        models.append(ridge_fit(X[idx], y[idx], sigma))
    return models


def committee_predict(models, X) -> CommitteePredictions:
    """Stack per-model predictions into a candidate-by-model matrix."""
    return CommitteePredictions(np.column_stack([predict(m, X) for m in models]))


def qbc_scores(cp: CommitteePredictions) -> np.ndarray:
    """Per-candidate variance of the committee predictions.

    Population normalization: the squared deviations from the committee mean
    are averaged over the committee size.
    """
    mean = cp.preds.mean(axis=1, keepdims=True)
    return np.mean((cp.preds - mean) ** 2, axis=1)


def emcm_scores(cp: CommitteePredictions, X) -> np.ndarray:
    """Per-candidate expected magnitude of the linear-model update.

    For a linear model the gradient a labeled sample would contribute is its
    prediction error times the feature vector, so the score reduces to the
    mean absolute committee deviation times the feature norm.
    """
    X = np.asarray(X, dtype=float)
    if X.shape[0] != cp.preds.shape[0]:
        raise ValueError("feature rows must match the prediction rows")
    mean = cp.preds.mean(axis=1, keepdims=True)
    mad = np.mean(np.abs(cp.preds - mean), axis=1)
    return mad * np.linalg.norm(X, axis=1)
