"""Response-time targets and the band-power feature pipeline.

Turns raw per-epoch inputs into a regression-ready dataset: response times
map onto a smoothed [0, 1] drowsiness scale, and channel band powers go
through dB conversion, noisy-channel rejection, per-channel standardization,
a PCA keeping 95% of the variance, and a final min-max rescale to [0, 1].
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataset import Dataset, _frozen
from .linalg import sym_eig

__all__ = [
    "BandPowerTable",
    "DrowsinessRecord",
    "PcaModel",
    "build_feature_dataset",
    "drowsiness_index",
    "drowsiness_targets",
    "load_band_power_csv",
    "load_response_time_csv",
    "moving_average",
    "pca_fit",
    "project_and_scale",
    "reject_channels",
    "to_db",
    "zscore_columns",
]

CHANNEL_REJECT_DB = 20.0
DEFAULT_VARIANCE_THRESHOLD = 0.95
DEFAULT_SMOOTH_WINDOW = 9  # 90 s of history at one sample every 10 s
DEFAULT_TAU_OFFSET = 1.0


def drowsiness_index(tau: float, tau0: float = DEFAULT_TAU_OFFSET) -> float:
    """Map a response time (seconds) onto the [0, 1) drowsiness scale.

    Zero at or below the offset ``tau0``, then saturating towards 1 as the
    response time grows.
    """
    tau = float(tau)
    tau0 = float(tau0)
    if not (math.isfinite(tau) and math.isfinite(tau0)):
        raise ValueError("response time and offset must be finite")
    if tau < 0.0:
        raise ValueError("response time must be non-negative")
    z = tau - tau0
    if z <= 0.0:
        return 0.0
    e = math.exp(-z)
    return (1.0 - e) / (1.0 + e)


@dataclass(frozen=True)
class DrowsinessRecord:
    """One response-time measurement with its mapped drowsiness value."""

    tau: float
    tau0: float
    y: float

    @classmethod
    def from_response_time(cls, tau: float, tau0: float = DEFAULT_TAU_OFFSET) -> "DrowsinessRecord":
        return cls(float(tau), float(tau0), drowsiness_index(tau, tau0))


def moving_average(series, window: int) -> np.ndarray:
    """Trailing moving average; shorter prefix windows use all available history."""
    series = np.asarray(series, dtype=float)
    if series.ndim != 1 or series.size == 0:
        raise ValueError("series must be a non-empty vector")
    if not np.all(np.isfinite(series)):
        raise ValueError("series contains non-finite values")
    window = int(window)
    if window < 1:
        raise ValueError("window must be at least 1")
    if window > series.size:
        raise ValueError("window exceeds series length")
    padded = np.concatenate(([0.0], np.cumsum(series)))
    full = (padded[window:] - padded[:-window]) / window
    prefix = padded[1:window] / np.arange(1, window)
    return np.concatenate([prefix, full])


def drowsiness_targets(taus, tau0: float = DEFAULT_TAU_OFFSET, smooth_window: int = DEFAULT_SMOOTH_WINDOW) -> np.ndarray:
    """Map response times through the index and smooth with a trailing window."""
    taus = np.asarray(taus, dtype=float)
    vals = np.array([drowsiness_index(t, tau0) for t in taus])
    return moving_average(vals, smooth_window)


@dataclass(frozen=True)
class BandPowerTable:
    """Per-epoch, per-channel band power in linear units (strictly positive)."""

    powers: np.ndarray
    channel_names: tuple[str, ...]

    def __post_init__(self):
        powers = np.asarray(self.powers, dtype=float)
        if powers.ndim != 2:
            raise ValueError("powers must be a 2-D matrix")
        if not np.all(np.isfinite(powers)):
            raise ValueError("powers contain non-finite values")
        if np.any(powers <= 0.0):
            raise ValueError("band powers must be strictly positive")
        names = tuple(str(n) for n in self.channel_names)
        if len(names) != powers.shape[1]:
            raise ValueError("channel_names must match the power columns")
        object.__setattr__(self, "powers", _frozen(powers))
        object.__setattr__(self, "channel_names", names)

    @property
    def n_epochs(self) -> int:
        return self.powers.shape[0]

    @property
    def n_channels(self) -> int:
        return self.powers.shape[1]


def to_db(powers: BandPowerTable) -> np.ndarray:
    """Convert linear band powers to decibels."""
    return 10.0 * np.log10(powers.powers)


def reject_channels(db) -> tuple[np.ndarray, list[int]]:
    """Drop channels whose maximum exceeds the rejection ceiling.

    Returns the surviving columns (order preserved) and the rejected column
    indices.
    """
    db = np.asarray(db, dtype=float)
    if db.ndim != 2 or db.shape[1] < 1:
        raise ValueError("expected a matrix with at least one channel column")
    maxima = db.max(axis=0)
    rejected = [j for j in range(db.shape[1]) if maxima[j] > CHANNEL_REJECT_DB]
    if len(rejected) == db.shape[1]:
        raise ValueError("every channel exceeded the rejection ceiling")
    kept = np.delete(db, rejected, axis=1)
    return kept, rejected


def zscore_columns(X) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Standardize each column to mean zero and (population) standard deviation one."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    mean = X.mean(axis=0)
    sd = X.std(axis=0)
    if np.any(sd == 0.0):
        raise ValueError("constant column cannot be standardized")
    return (X - mean) / sd, mean, sd


@dataclass(frozen=True)
class PcaModel:
    """Principal components of a standardized feature block.

    ``components`` is d-by-q with orthonormal columns sorted by descending
    explained variance; ``variance_ratio_kept`` is the cumulative ratio at q.
    """

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray
    variance_ratio_kept: float

    def __post_init__(self):
        object.__setattr__(self, "mean", _frozen(np.asarray(self.mean, dtype=float)))
        object.__setattr__(self, "components", _frozen(np.asarray(self.components, dtype=float)))
        object.__setattr__(self, "explained_variance", _frozen(np.asarray(self.explained_variance, dtype=float)))

    @property
    def n_components(self) -> int:
        return self.components.shape[1]


def pca_fit(Z, variance_threshold: float = DEFAULT_VARIANCE_THRESHOLD) -> PcaModel:
    """Fit principal components keeping the smallest count whose cumulative
    explained-variance ratio reaches the threshold.

    Components are eigenvectors of the sample covariance matrix, each with
    its largest-magnitude entry forced positive for reproducibility.
    """
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    n, d = Z.shape
    if d < 1 or n <= d:
        raise ValueError("need more rows than columns to estimate a covariance")
    if not 0.0 < variance_threshold <= 1.0:
        raise ValueError("variance_threshold must lie in (0, 1]")
    mean = Z.mean(axis=0)
    centered = Z - mean
    cov = centered.T @ centered / (n - 1)
    cov = (cov + cov.T) / 2.0
    values, vectors = sym_eig(cov)
    values = np.clip(values, 0.0, None)
    total = float(values.sum())
    if total <= 0.0:
        raise ValueError("data has no variance")
    ratios = np.cumsum(values) / total
    q = int(np.searchsorted(ratios, variance_threshold - 1e-12) + 1)
    q = min(q, d)
    components = vectors[:, :q].copy()
    for i in range(q):
        j = int(np.argmax(np.abs(components[:, i])))
        if components[j, i] < 0.0:
            components[:, i] = -components[:, i]
    return PcaModel(mean, components, values[:q], float(ratios[q - 1]))


def project_and_scale(model: PcaModel, Z) -> np.ndarray:
    """Project onto the kept components and min-max scale each score column
    to [0, 1] using this (full offline) dataset's extremes."""
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2 or Z.shape[1] != model.mean.shape[0]:
        raise ValueError("column count does not match the fitted model")
    scores = (Z - model.mean) @ model.components
    lo = scores.min(axis=0)
    hi = scores.max(axis=0)
    span = hi - lo
    if np.any(span == 0.0):
        raise ValueError("zero-range score column cannot be scaled")
    return (scores - lo) / span


def load_band_power_csv(path) -> tuple[np.ndarray, BandPowerTable]:
    """Read ``epoch,ch_<name>,...`` rows into epoch ids and a power table."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such band-power file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if not header or header[0] != "epoch":
            raise ValueError(f"{path}: first column must be 'epoch'")
        names = []
        for h in header[1:]:
            if not h.startswith("ch_"):
                raise ValueError(f"{path}: channel columns must be named 'ch_<name>', got {h!r}")
            names.append(h[3:])
        if not names:
            raise ValueError(f"{path}: no channel columns")
        epochs, rows = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: ragged row")
            epochs.append(int(row[0]))
            rows.append([float(v) for v in row[1:]])
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return np.array(epochs), BandPowerTable(np.array(rows), tuple(names))


def load_response_time_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read ``epoch,tau`` rows into epoch ids and response times."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such response-time file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if header[:2] != ["epoch", "tau"]:
            raise ValueError(f"{path}: expected header 'epoch,tau'")
        epochs, taus = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: ragged row")
            epochs.append(int(row[0]))
            taus.append(float(row[1]))
    if not taus:
        raise ValueError(f"{path}: no data rows")
    return np.array(epochs), np.array(taus)


def build_feature_dataset(
    table: BandPowerTable,
    taus,
    *,
    tau0: float = DEFAULT_TAU_OFFSET,
    smooth_window: int = DEFAULT_SMOOTH_WINDOW,
    variance_threshold: float = DEFAULT_VARIANCE_THRESHOLD,
    ids=None,
) -> tuple[Dataset, PcaModel, list[int]]:
    """Run the full pipeline from band powers and response times to a Dataset.

    Returns the dataset, the fitted PCA model, and the rejected channel
    indices.
    """
    taus = np.asarray(taus, dtype=float)
    if taus.shape[0] != table.n_epochs:
        raise ValueError("response times and band powers must cover the same epochs")
    y = drowsiness_targets(taus, tau0, smooth_window)
    db = to_db(table)
    kept, rejected = reject_channels(db)
    Z, _, _ = zscore_columns(kept)
    model = pca_fit(Z, variance_threshold)
    feats = project_and_scale(model, Z)
    if ids is None:
        ids = np.arange(table.n_epochs)
    return Dataset(feats, y, np.asarray(ids, dtype=np.int64)), model, rejected
