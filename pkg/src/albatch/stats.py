"""Rank-based pairwise comparisons with step-up false-discovery correction.

Groups are ranked jointly (mid-ranks for ties) and each requested pair gets
a one-sided normal p-value from the tie-corrected rank-mean statistic; the
six reported pairs are then adjusted per batch number with the
Benjamini-Hochberg step-up rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .harness import ResultsTable

__all__ = [
    "ALPHA",
    "COMPARISON_PAIRS",
    "ComparisonCell",
    "ComparisonTable",
    "HIGHER_BETTER",
    "LOWER_BETTER",
    "REQUIRED_STRATEGIES",
    "bh_fdr",
    "comparison_table",
    "dunn_pairwise",
    "read_comparison_csv",
    "write_comparison_csv",
]

LOWER_BETTER = "lower_better"
HIGHER_BETTER = "higher_better"
ALPHA = 0.05

REQUIRED_STRATEGIES = ("bl", "qbc", "eqbc", "emcm", "eemcm")
COMPARISON_PAIRS = (
    ("qbc", "bl"),
    ("eqbc", "bl"),
    ("emcm", "bl"),
    ("eemcm", "bl"),
    ("eqbc", "qbc"),
    ("eemcm", "emcm"),
)


def _normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def dunn_pairwise(groups, pairs, direction: str) -> list[float]:
    """One-sided p-value per pair from jointly ranked groups.

    For pair ``(i, j)`` the alternative is "group i is better than group j"
    in the stated direction.  The rank-mean difference is standardized with
    the tie-corrected variance; fully tied data yields p = 0.5.
    """
    if direction not in (LOWER_BETTER, HIGHER_BETTER):
        raise ValueError(f"unknown direction {direction!r}")
    groups = [np.asarray(g, dtype=float) for g in groups]
    if len(groups) < 2 or any(g.ndim != 1 or g.size < 2 for g in groups):
        raise ValueError("need at least two groups with at least two observations each")
    pooled = np.concatenate(groups)
    n_total = pooled.size
    ranks = rankdata(pooled)
    _, counts = np.unique(pooled, return_counts=True)
    tie_term = float(np.sum(counts.astype(float) ** 3 - counts))
    var_factor = n_total * (n_total + 1) / 12.0 - tie_term / (12.0 * (n_total - 1))
    rank_means = []
    sizes = []
    offset = 0
    for g in groups:
        rank_means.append(float(ranks[offset : offset + g.size].mean()))
        sizes.append(g.size)
        offset += g.size
    pvals = []
    for i, j in pairs:
        se2 = var_factor * (1.0 / sizes[i] + 1.0 / sizes[j])
        if se2 <= 0.0:
            pvals.append(0.5)  # every observation tied
            continue
        z = (rank_means[i] - rank_means[j]) / math.sqrt(se2)
        p = _normal_cdf(z) if direction == LOWER_BETTER else _normal_cdf(-z)
        pvals.append(float(p))
    return pvals


def bh_fdr(pvals) -> np.ndarray:
    """Benjamini-Hochberg step-up adjustment, clipped to one, original order."""
    p = np.asarray(pvals, dtype=float)
    if p.ndim != 1:
        raise ValueError("expected a vector of p-values")
    if p.size and (np.any(p < 0.0) or np.any(p > 1.0) or not np.all(np.isfinite(p))):
        raise ValueError("p-values must lie in [0, 1]")
    n = p.size
    if n == 0:
        return p.copy()
    order = np.argsort(p, kind="stable")
    scaled = p[order] * n / np.arange(1, n + 1)
    adj = np.minimum.accumulate(scaled[::-1])[::-1]
    adj = np.minimum(adj, 1.0)
    out = np.empty(n)
    out[order] = adj
    return out


@dataclass(frozen=True)
class ComparisonCell:
    m: int
    first: str
    second: str
    p_raw: float
    p_adj: float
    significant: bool

    @property
    def pair(self) -> str:
        return f"{self.first}_vs_{self.second}"


@dataclass(frozen=True)
class ComparisonTable:
    metric: str
    cells: tuple[ComparisonCell, ...]

    def cell(self, m: int, first: str, second: str) -> ComparisonCell:
        for c in self.cells:
            if c.m == m and c.first == first and c.second == second:
                return c
        raise KeyError(f"no cell for m={m}, {first} vs {second}")


def comparison_table(table: ResultsTable, metric: str) -> ComparisonTable:
    """Per-batch one-sided pairwise comparisons over per-(subject, run) values.

    Groups one vector of metric values per strategy for each batch number,
    runs the joint-rank test on the six reported pairs (direction: lower is
    better for rmse, higher is better for cc), and adjusts the six p-values
    per batch with the step-up rule.
    """
    if metric not in ("rmse", "cc"):
        raise ValueError(f"unknown metric {metric!r}")
    present = set(table.strategies)
    missing = [s for s in REQUIRED_STRATEGIES if s not in present]
    if missing:
        raise ValueError(f"results table is missing strategies: {', '.join(missing)}")
    direction = LOWER_BETTER if metric == "rmse" else HIGHER_BETTER
    values: dict[tuple[int, str], list[float]] = {}
    for r in table.rows:
        if r.strategy in REQUIRED_STRATEGIES:
            values.setdefault((r.m, r.strategy), []).append(getattr(r, metric))
    index = {s: i for i, s in enumerate(REQUIRED_STRATEGIES)}
    pair_indices = [(index[a], index[b]) for a, b in COMPARISON_PAIRS]
    cells = []
    for m in table.batch_numbers:
        groups = [np.array(values[(m, s)]) for s in REQUIRED_STRATEGIES]
        raw = dunn_pairwise(groups, pair_indices, direction)
        adj = bh_fdr(raw)
        for (a, b), p_raw, p_adj in zip(COMPARISON_PAIRS, raw, adj):
            cells.append(ComparisonCell(m, a, b, float(p_raw), float(p_adj), bool(p_adj < ALPHA)))
    return ComparisonTable(metric, tuple(cells))


def write_comparison_csv(ct: ComparisonTable, path) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["m", "pair", "metric", "p_raw", "p_adj", "significant"])
        for c in ct.cells:
            writer.writerow([c.m, c.pair, ct.metric, repr(c.p_raw), repr(c.p_adj), int(c.significant)])


def read_comparison_csv(path) -> ComparisonTable:
    import csv

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["m", "pair", "metric", "p_raw", "p_adj", "significant"]:
            raise ValueError(f"unexpected comparison header {header}")
        cells = []
        metric = ""
        for row in reader:
            if not row:
                continue
            metric = row[2]
            first, second = row[1].split("_vs_")
            cells.append(ComparisonCell(int(row[0]), first, second,
                                        float(row[3]), float(row[4]), bool(int(row[5]))))
    return ComparisonTable(metric, tuple(cells))
