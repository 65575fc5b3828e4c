"""Evaluation protocol: repeated pool draws, learning curves, improvements.

Every (subject, run) unit draws one pool and executes all configured
strategies on it with a shared seed discipline, so strategies are paired
within a unit: identical pools, identical first random batches, identical
bootstrap streams wherever trajectories coincide.  After each batch the
fitted model is scored on every pool sample not yet labeled.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import seeding
from .dataset import Dataset, draw_pool
from .regression import DEFAULT_RIDGE_SIGMA, pearson_cc, predict, rmse
from .strategies import DEFAULT_OUTLIER_GAMMA, STRATEGY_NAMES, StrategySpec, run_strategy, strategy_from_name

__all__ = [
    "CurvePoint",
    "ExperimentConfig",
    "FLAG_DEGENERATE",
    "FLAG_TRAIN_ONLY",
    "ImprovementPoint",
    "ResultRow",
    "ResultsTable",
    "learning_curves",
    "pct_improvement",
    "read_results_csv",
    "run_experiment",
    "write_curves_csv",
    "write_improvements_csv",
    "write_results_csv",
]

DEFAULT_STRATEGIES = ("bl", "qbc", "eqbc", "emcm", "eemcm")
FLAG_DEGENERATE = "degenerate"
FLAG_TRAIN_ONLY = "train_only"
METRICS = ("rmse", "cc")


@dataclass(frozen=True)
class ExperimentConfig:
    """Protocol parameters for one benchmark run."""

    strategies: tuple[str, ...] = DEFAULT_STRATEGIES
    batch_size: int = 5
    n_batches: int = 12
    pool_fraction: float = 0.8
    n_runs: int = 30
    master_seed: int = 0
    sigma: float = DEFAULT_RIDGE_SIGMA
    gamma: float = DEFAULT_OUTLIER_GAMMA
    committee_size: int = 4

    def __post_init__(self):
        object.__setattr__(self, "strategies", tuple(self.strategies))
        if not self.strategies:
            raise ValueError("need at least one strategy")
        unknown = [s for s in self.strategies if s not in STRATEGY_NAMES]
        if unknown:
            raise ValueError(f"unknown strategies: {', '.join(unknown)}")
        if len(set(self.strategies)) != len(self.strategies):
            raise ValueError("duplicate strategy names")
        if self.n_runs < 1:
            raise ValueError("n_runs must be at least 1")
        if self.n_batches < 1:
            raise ValueError("n_batches must be at least 1")
        if not 0.0 < self.pool_fraction <= 1.0:
            raise ValueError("pool_fraction must lie in (0, 1]")
        if self.master_seed < 0:
            raise ValueError("master_seed must be non-negative")

    def strategy_spec(self, name: str) -> StrategySpec:
        return strategy_from_name(name, batch_size=self.batch_size, gamma=self.gamma,
                                  committee_size=self.committee_size, sigma=self.sigma)


@dataclass(frozen=True)
class ResultRow:
    subject: str
    strategy: str
    run: int
    m: int
    rmse: float
    cc: float
    flag: str = ""


@dataclass(frozen=True)
class ResultsTable:
    rows: tuple[ResultRow, ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        for r in self.rows:
            if r.rmse < 0.0 or not -1.0 <= r.cc <= 1.0:
                raise ValueError(f"invalid metric values in row {r}")

    @property
    def strategies(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for r in self.rows:
            seen.setdefault(r.strategy, None)
        return tuple(seen)

    @property
    def subjects(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for r in self.rows:
            seen.setdefault(r.subject, None)
        return tuple(seen)

    @property
    def batch_numbers(self) -> tuple[int, ...]:
        return tuple(sorted({r.m for r in self.rows}))


def _pool_size(n: int, fraction: float) -> int:
    return int(math.floor(fraction * n + 0.5))


def _evaluate(pool: Dataset, model, labeled: list[int]) -> tuple[float, float, str]:
    mask = np.ones(pool.n, dtype=bool)
    mask[labeled] = False
    eval_rows = np.flatnonzero(mask)
    flags = []
    if eval_rows.size == 0:
        # terminal batch consumed the whole pool; score on the labeled set
        eval_rows = np.asarray(labeled, dtype=int)
        flags.append(FLAG_TRAIN_ONLY)
    else:
        assert not set(eval_rows.tolist()) & set(labeled), "evaluation overlaps labeled set"
    y = pool.targets[eval_rows]
    yhat = predict(model, pool.features[eval_rows])
    err = rmse(y, yhat)
    if eval_rows.size < 2:
        cc, degenerate = 0.0, True
    else:
        cc, degenerate = pearson_cc(y, yhat)
    if degenerate:
        flags.append(FLAG_DEGENERATE)
    return err, cc, ";".join(flags)


def _run_unit(cfg: ExperimentConfig, subject_name: str, ds: Dataset,
              subject_index: int, run_index: int) -> list[ResultRow]:
    """All strategies on one (subject, run) pool; rows in (strategy, m) order."""
    run_seed = seeding.child_seed(cfg.master_seed, seeding.SUBJECT_RUN, subject_index, run_index)
    pool = draw_pool(ds, cfg.pool_fraction, seeding.child_seed(run_seed, seeding.POOL_DRAW))
    rows: list[ResultRow] = []
    for name in cfg.strategies:
        result = run_strategy(pool, cfg.strategy_spec(name), cfg.n_batches, run_seed)
        labeled: list[int] = []
        for m, (model, batch) in enumerate(zip(result.models, result.state.batch_history), start=1):
            labeled.extend(batch)
            err, cc, flag = _evaluate(pool, model, labeled)
            rows.append(ResultRow(subject_name, name, run_index, m, err, cc, flag))
    return rows


def _run_unit_packed(args) -> tuple[tuple[int, int], list[ResultRow]]:
    cfg, name, ds, si, run = args
    return (si, run), _run_unit(cfg, name, ds, si, run)


def run_experiment(cfg: ExperimentConfig, subjects, jobs: int = 1) -> ResultsTable:
    """Run every strategy on every (subject, run) pool draw.

    ``subjects`` is an ordered list of ``(name, Dataset)`` pairs.  Units are
    independent and may run in parallel; the output ordering is
    (subject, strategy, run, m) regardless of scheduling.
    """
    subjects = list(subjects)
    if not subjects:
        raise ValueError("need at least one subject")
    names = [name for name, _ in subjects]
    if len(set(names)) != len(names):
        raise ValueError("duplicate subject names")
    for name, ds in subjects:
        if _pool_size(ds.n, cfg.pool_fraction) < cfg.batch_size:
            raise ValueError(f"subject {name}: pool too small for even one batch")
    units = [(cfg, name, ds, si, run)
             for si, (name, ds) in enumerate(subjects)
             for run in range(cfg.n_runs)]
    by_unit: dict[tuple[int, int], list[ResultRow]] = {}
    if jobs <= 1:
        for args in units:
            key, rows = _run_unit_packed(args)
            by_unit[key] = rows
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for key, rows in pool.map(_run_unit_packed, units, chunksize=4):
                by_unit[key] = rows
    # deterministic assembly: subject, strategy (config order), run, m
    ordered: list[ResultRow] = []
    strategy_order = {s: i for i, s in enumerate(cfg.strategies)}
    for si in range(len(subjects)):
        unit_rows = [row for run in range(cfg.n_runs) for row in by_unit[(si, run)]]
        unit_rows.sort(key=lambda r: (strategy_order[r.strategy], r.run, r.m))
        ordered.extend(unit_rows)
    return ResultsTable(tuple(ordered))


@dataclass(frozen=True)
class CurvePoint:
    strategy: str
    m: int
    metric: str
    mean: float
    sd: float


def learning_curves(table: ResultsTable) -> list[CurvePoint]:
    """Two-stage mean curves: average over runs within subject, then across
    subjects.  The spread is the sample standard deviation across subjects
    (zero with a single subject)."""
    if not table.rows:
        raise ValueError("empty results table")
    per_subject: dict[tuple[str, int, str, str], list[float]] = {}
    for r in table.rows:
        per_subject.setdefault((r.strategy, r.m, "rmse", r.subject), []).append(r.rmse)
        per_subject.setdefault((r.strategy, r.m, "cc", r.subject), []).append(r.cc)
    subject_means: dict[tuple[str, int, str], list[float]] = {}
    for (strategy, m, metric, _subject), vals in per_subject.items():
        subject_means.setdefault((strategy, m, metric), []).append(float(np.mean(vals)))
    points = []
    for strategy in table.strategies:
        for m in table.batch_numbers:
            for metric in METRICS:
                means = subject_means.get((strategy, m, metric))
                if means is None:
                    continue
                sd = float(np.std(means, ddof=1)) if len(means) > 1 else 0.0
                points.append(CurvePoint(strategy, m, metric, float(np.mean(means)), sd))
    return points


@dataclass(frozen=True)
class ImprovementPoint:
    m: int
    value: float
    flagged: bool


def pct_improvement(curve_a, curve_b, metric: str) -> list[ImprovementPoint]:
    """Percentage improvement of A over B along the batch axis.

    For error metrics (rmse) positive means A is lower; for agreement
    metrics (cc) positive means A is higher.  A zero denominator yields a
    flagged missing point instead of an infinity.
    """
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    a = {p.m: p.mean for p in curve_a if p.metric == metric}
    b = {p.m: p.mean for p in curve_b if p.metric == metric}
    if set(a) != set(b):
        raise ValueError("curves are not aligned on the same batch grid")
    points = []
    for m in sorted(a):
        denom = b[m] if metric == "rmse" else abs(b[m])
        if denom == 0.0:
            points.append(ImprovementPoint(m, float("nan"), True))
        elif metric == "rmse":
            points.append(ImprovementPoint(m, 100.0 * (b[m] - a[m]) / denom, False))
        else:
            points.append(ImprovementPoint(m, 100.0 * (a[m] - b[m]) / denom, False))
    return points


def write_results_csv(table: ResultsTable, path) -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["subject", "strategy", "run", "m", "rmse", "cc", "cc_flag"])
        for r in table.rows:
            writer.writerow([r.subject, r.strategy, r.run, r.m, repr(r.rmse), repr(r.cc), r.flag])


def read_results_csv(path) -> ResultsTable:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such results file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["subject", "strategy", "run", "m", "rmse", "cc", "cc_flag"]:
            raise ValueError(f"{path}: unexpected results header {header}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 7:
                raise ValueError(f"{path}:{lineno}: ragged row")
            rows.append(ResultRow(row[0], row[1], int(row[2]), int(row[3]),
                                  float(row[4]), float(row[5]), row[6]))
    return ResultsTable(tuple(rows))


def write_curves_csv(points, path) -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["strategy", "m", "metric", "mean", "sd"])
        for p in points:
            writer.writerow([p.strategy, p.m, p.metric, repr(p.mean), repr(p.sd)])


def write_improvements_csv(improvements, path) -> None:
    """``improvements`` maps pair label -> {metric -> [ImprovementPoint]}."""
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pair", "m", "metric", "value", "flag"])
        for pair, by_metric in improvements.items():
            for metric, points in by_metric.items():
                for p in points:
                    value = "" if p.flagged else repr(p.value)
                    writer.writerow([pair, p.m, metric, value, int(p.flagged)])
