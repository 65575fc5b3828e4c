"""Sample pools: construction, CSV persistence, pool draws, synthetic subjects.

A :class:`Dataset` is an immutable feature matrix with aligned targets and
stable integer sample ids.  Selection bookkeeping lives in the mutable
:class:`LabelState`, which partitions pool row positions into labeled,
unlabeled, and blacklisted sets.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Dataset",
    "LabelState",
    "SynthConfig",
    "SynthMeta",
    "draw_pool",
    "load_csv",
    "save_csv",
    "synth_generate",
]


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Dataset:
    """A pool of candidate samples: features, targets, and stable sample ids."""

    features: np.ndarray
    targets: np.ndarray
    ids: np.ndarray

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=float)
        targs = np.asarray(self.targets, dtype=float)
        ids = np.asarray(self.ids, dtype=np.int64)
        if feats.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        n, d = feats.shape
        if n < 1 or d < 1:
            raise ValueError("need at least one sample and one feature")
        if targs.shape != (n,):
            raise ValueError("targets must be a vector matching the feature rows")
        if ids.shape != (n,):
            raise ValueError("ids must be a vector matching the feature rows")
        if not np.all(np.isfinite(feats)) or not np.all(np.isfinite(targs)):
            raise ValueError("dataset values must be finite")
        if np.unique(ids).size != n:
            raise ValueError("sample ids must be unique")
        object.__setattr__(self, "features", _frozen(feats))
        object.__setattr__(self, "targets", _frozen(targs))
        object.__setattr__(self, "ids", _frozen(ids))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=int)
        return Dataset(self.features[rows], self.targets[rows], self.ids[rows])


class LabelState:
    """Mutable partition of pool positions into labeled / unlabeled / blacklisted.

    Positions are row indices into the pool the state was created for.  The
    labeled list preserves selection order and `batch_history` records the
    positions chosen in each batch; their concatenation always equals the
    labeled list.
    """

    def __init__(self, n_samples: int):
        if n_samples < 1:
            raise ValueError("a label state needs at least one sample")
        self.n_samples = int(n_samples)
        self.labeled: list[int] = []
        self.unlabeled: set[int] = set(range(self.n_samples))
        self.blacklisted: set[int] = set()
        self.batch_history: list[list[int]] = []

    def add_batch(self, positions: Iterable[int]) -> None:
        batch = [int(p) for p in positions]
        if not batch:
            raise ValueError("cannot record an empty batch")
        if len(set(batch)) != len(batch):
            raise ValueError("batch contains duplicate positions")
        for p in batch:
            if p not in self.unlabeled:
                raise ValueError(f"position {p} is not available for labeling")
        for p in batch:
            self.unlabeled.remove(p)
        self.labeled.extend(batch)
        self.batch_history.append(batch)

    def blacklist(self, positions: Iterable[int]) -> None:
        staged = {int(p) for p in positions}
        for p in staged:
            if p not in self.unlabeled:
                raise ValueError(f"position {p} cannot be blacklisted")
        self.unlabeled -= staged
        self.blacklisted |= staged

    def validate(self) -> None:
        """Check the partition invariant; raises ValueError when violated."""
        lab = set(self.labeled)
        if len(lab) != len(self.labeled):
            raise ValueError("labeled list contains duplicates")
        parts = (lab, self.unlabeled, self.blacklisted)
        total = set().union(*parts)
        if total != set(range(self.n_samples)):
            raise ValueError("partition does not cover all positions")
        if sum(len(p) for p in parts) != self.n_samples:
            raise ValueError("labeled/unlabeled/blacklisted sets overlap")
        flat = [p for batch in self.batch_history for p in batch]
        if flat != self.labeled:
            raise ValueError("batch history does not reproduce the labeled order")


def load_csv(path) -> Dataset:
    """Read a dataset from CSV.

    Expects a header with a target column named ``y``; an ``id`` column is
    used when present, otherwise row order assigns ids.  Every remaining
    column is a feature.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such dataset file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if "y" not in header:
            raise ValueError(f"{path}: missing target column 'y'")
        y_col = header.index("y")
        id_col = header.index("id") if "id" in header else None
        feat_cols = [i for i in range(len(header)) if i != y_col and i != id_col]
        if not feat_cols:
            raise ValueError(f"{path}: no feature columns")
        feats, targs, ids = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
            try:
                vals = [float(row[i]) for i in feat_cols]
                y = float(row[y_col])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric cell") from None
            if not all(math.isfinite(v) for v in vals) or not math.isfinite(y):
                raise ValueError(f"{path}:{lineno}: non-finite value")
            if id_col is not None:
                try:
                    ids.append(int(row[id_col]))
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: non-integer id") from None
            feats.append(vals)
            targs.append(y)
    if not feats:
        raise ValueError(f"{path}: no data rows")
    if id_col is None:
        ids = list(range(len(feats)))
    return Dataset(np.array(feats), np.array(targs), np.array(ids))


def save_csv(ds: Dataset, path) -> None:
    """Write a dataset as ``id,f0,...,y`` with exact-round-trip float formatting."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id"] + [f"f{j}" for j in range(ds.d)] + ["y"])
        for i in range(ds.n):
            row = [str(int(ds.ids[i]))]
            row += [repr(float(v)) for v in ds.features[i]]
            row.append(repr(float(ds.targets[i])))
            writer.writerow(row)


def draw_pool(ds: Dataset, fraction: float, seed: int) -> Dataset:
    """Draw a uniformly random pool without replacement.

    The pool size is ``fraction * n`` rounded half-up; sampling without
    replacement keeps every pool sample distinct.  Deterministic per seed.
    """
    fraction = float(fraction)
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"pool fraction must lie in (0, 1], got {fraction}")
    size = int(math.floor(fraction * ds.n + 0.5))
    if size < 1:
        raise ValueError("pool draw would be empty")
    rng = np.random.default_rng(seed)
    rows = rng.permutation(ds.n)[:size]
    return ds.subset(rows)


# Distance between the two members of a planted outlier pair.
_PAIR_SPAN = 0.8


@dataclass(frozen=True)
class SynthConfig:
    """Parameters of the synthetic regression subject generator."""

    n_samples: int = 360
    n_features: int = 10
    noise_sd: float = 0.05
    outlier_fraction: float = 0.02
    outlier_scale: float = 6.0
    seed: int = 0

    def __post_init__(self):
        if self.n_samples < self.n_features + 2:
            raise ValueError("n_samples must be at least n_features + 2")
        if self.n_features < 1:
            raise ValueError("need at least one feature")
        if not 0.0 <= self.outlier_fraction < 0.5:
            raise ValueError("outlier_fraction must lie in [0, 0.5)")
        if self.outlier_scale <= 1.0:
            raise ValueError("outlier_scale must exceed 1")
        if self.noise_sd < 0.0:
            raise ValueError("noise_sd must be non-negative")


@dataclass(frozen=True)
class SynthMeta:
    """Generator ground truth for test oracles.

    ``weights`` and ``bias`` describe the affine map that clean rows satisfy
    after target rescaling: ``y = weights @ x + bias + noise``.  Outlier rows
    keep the target of their original location, so their recorded features no
    longer follow the map.
    """

    weights: np.ndarray
    bias: float
    outlier_ids: tuple[int, ...]


def synth_generate(cfg: SynthConfig) -> tuple[Dataset, SynthMeta]:
    """Generate one synthetic subject.

    Features are uniform on the unit cube and targets are a noisy linear map
    rescaled to [0, 1].  A requested fraction of rows is then displaced to
    tight clusters of one or two points at distance at least
    ``outlier_scale`` from the data centroid, with targets left at their
    pre-displacement values.
    """
    rng = np.random.default_rng(cfg.seed)
    n, d = cfg.n_samples, cfg.n_features
    X = rng.uniform(size=(n, d))
    w = rng.normal(size=d)
    b = rng.normal()
    y_raw = X @ w + b + rng.normal(0.0, cfg.noise_sd, size=n)
    lo, hi = float(y_raw.min()), float(y_raw.max())
    if hi - lo <= 1e-12:
        raise ValueError("degenerate target range; increase n_samples or noise_sd")
    y = (y_raw - lo) / (hi - lo)
    w_eff = w / (hi - lo)
    b_eff = (b - lo) / (hi - lo)

    n_out = int(math.floor(cfg.outlier_fraction * n + 0.5))
    out_rows = np.sort(rng.choice(n, size=n_out, replace=False)) if n_out else np.array([], dtype=int)
    centroid = X.mean(axis=0)
    w_norm = float(np.linalg.norm(w_eff))
    pos = 0
    while pos < n_out:
        size = min(2, n_out - pos)
        members = out_rows[pos : pos + size]
        radius = cfg.outlier_scale * (1.0 + rng.uniform())
        # Tilt the displacement so the clean linear map at the cluster center
        # equals the members' mean target.  A skipped cluster then adds almost
        # nothing to any model's evaluation error; its cost appears only when
        # a strategy spends labels on it.  Pair members sit a moderate span
        # apart while keeping their original (mutually unrelated) targets, so
        # fitting a labeled pair forces a garbage slope onto the model.
        ortho = rng.normal(size=d)
        if w_norm > 0.0:
            w_hat = w_eff / w_norm
            ortho = ortho - (ortho @ w_hat) * w_hat
            norm = float(np.linalg.norm(ortho))
            while norm < 1e-12:
                ortho = rng.normal(size=d)
                ortho = ortho - (ortho @ w_hat) * w_hat
                norm = float(np.linalg.norm(ortho))
            ortho /= norm
            target_gap = float(y[members].mean()) - float(w_eff @ centroid + b_eff)
            cos = max(-0.9, min(0.9, target_gap / (radius * w_norm)))
            direction = cos * w_hat + math.sqrt(1.0 - cos * cos) * ortho
        else:
            direction = ortho / float(np.linalg.norm(ortho))
        center = centroid + radius * direction
        if size == 2:
            split = rng.normal(size=d)
            split *= (_PAIR_SPAN / 2.0) / float(np.linalg.norm(split))
            X[members[0]] = center + split + 0.01 * rng.normal(size=d)
            X[members[1]] = center - split + 0.01 * rng.normal(size=d)
        else:
            X[members[0]] = center + 0.01 * rng.normal(size=d)
        pos += size

    ds = Dataset(X, y, np.arange(n))
    meta = SynthMeta(_frozen(w_eff), float(b_eff), tuple(int(r) for r in out_rows))
    return ds, meta
