"""Sample-selection strategies: random, committee-scored, and enhanced variants.

The enhancement layer adds three independently switchable behaviors on top
of a base scorer:

* representative initialization -- the first batch is seeded from cluster
  centers instead of random draws;
* outlier blacklisting -- suspiciously small clusters found during
  initialization are excluded from selection for the rest of the run;
* batch diversity -- later batches cluster the top-2k scored candidates and
  take the best sample of each cluster instead of the plain top-k.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import seeding
from .clustering import closest_to_centroid, kmeans
from .committee import bootstrap_committee, committee_predict, emcm_scores, qbc_scores
from .dataset import Dataset, LabelState
from .regression import DEFAULT_RIDGE_SIGMA, RidgeModel, ridge_fit

__all__ = [
    "BASE_SCORERS",
    "BatchSelection",
    "EnhancementFlags",
    "STRATEGY_NAMES",
    "StrategyRun",
    "StrategySpec",
    "ebmal_init",
    "ebmal_select",
    "run_strategy",
    "select_random",
    "select_top_k",
    "strategy_from_name",
]

BASE_SCORERS = ("random", "qbc", "emcm")
DEFAULT_OUTLIER_GAMMA = 0.02


@dataclass(frozen=True)
class EnhancementFlags:
    representative_init: bool = False
    outlier_blacklist: bool = False
    diversity: bool = False

    @classmethod
    def none(cls) -> "EnhancementFlags":
        return cls()

    @classmethod
    def all(cls) -> "EnhancementFlags":
        return cls(True, True, True)

    @property
    def any(self) -> bool:
        return self.representative_init or self.outlier_blacklist or self.diversity


@dataclass(frozen=True)
class StrategySpec:
    """Everything a selection strategy needs besides the pool itself."""

    base: str
    flags: EnhancementFlags = EnhancementFlags()
    batch_size: int = 5
    gamma: float = DEFAULT_OUTLIER_GAMMA
    committee_size: int = 4
    sigma: float = DEFAULT_RIDGE_SIGMA

    def __post_init__(self):
        if self.base not in BASE_SCORERS:
            raise ValueError(f"unknown base scorer {self.base!r}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if not 0.0 <= self.gamma < 0.5:
            raise ValueError("gamma must lie in [0, 0.5)")
        if self.committee_size < 2:
            raise ValueError("committee_size must be at least 2")
        if self.sigma <= 0.0:
            raise ValueError("sigma must be positive")


# Named strategies: the three plain baselines, the fully enhanced pair, and
# the single-enhancement ablations of each enhanced algorithm.
_FLAGS_BY_SUFFIX = {
    "": EnhancementFlags.all(),
    "1": EnhancementFlags(representative_init=True),
    "2": EnhancementFlags(outlier_blacklist=True),
    "3": EnhancementFlags(diversity=True),
}

_REGISTRY: dict[str, tuple[str, EnhancementFlags]] = {
    "bl": ("random", EnhancementFlags.none()),
    "qbc": ("qbc", EnhancementFlags.none()),
    "emcm": ("emcm", EnhancementFlags.none()),
}
for _base in ("qbc", "emcm"):
    for _suffix, _flags in _FLAGS_BY_SUFFIX.items():
        _REGISTRY[f"e{_base}{_suffix}"] = (_base, _flags)

STRATEGY_NAMES = tuple(sorted(_REGISTRY))


def strategy_from_name(name: str, *, batch_size: int = 5, gamma: float = DEFAULT_OUTLIER_GAMMA,
                       committee_size: int = 4, sigma: float = DEFAULT_RIDGE_SIGMA) -> StrategySpec:
    key = name.strip().lower()
    if key not in _REGISTRY:
        raise ValueError(f"unknown strategy {name!r}; known: {', '.join(STRATEGY_NAMES)}")
    base, flags = _REGISTRY[key]
    return StrategySpec(base=base, flags=flags, batch_size=batch_size, gamma=gamma,
                        committee_size=committee_size, sigma=sigma)


@dataclass
class BatchSelection:
    """One batch worth of picks.

    ``chosen`` holds stable sample ids in pick order; ``chosen_positions``
    holds the pool row positions backing them.  ``newly_blacklisted`` lists
    ids excluded as outliers by this step (empty unless the step committed a
    blacklist).
    """

    chosen: list[int]
    chosen_positions: list[int]
    newly_blacklisted: set[int] = field(default_factory=set)
    blacklisted_positions: set[int] = field(default_factory=set)
    diagnostics: dict = field(default_factory=dict)


def _candidate_positions(state: LabelState) -> list[int]:
    return sorted(state.unlabeled)


def select_random(pool: Dataset, state: LabelState, batch_size: int, seed: int) -> BatchSelection:
    """Uniform draw without replacement from the unlabeled candidates."""
    candidates = _candidate_positions(state)
    if not candidates:
        raise ValueError("no unlabeled samples left")
    size = min(batch_size, len(candidates))
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(candidates), size=size, replace=False)
    positions = [candidates[int(i)] for i in picks]
    return BatchSelection(
        chosen=[int(pool.ids[p]) for p in positions],
        chosen_positions=positions,
    )


def ebmal_init(pool: Dataset, state: LabelState, batch_size: int, gamma: float, seed: int) -> BatchSelection:
    """First-batch seeding with outlier screening.

    Clusters the candidates into ``batch_size`` groups, strips every cluster
    whose size is at most ``max(1, gamma * N)`` (N fixed at the original
    candidate count), re-clusters until nothing trips the threshold, then
    picks the sample closest to each surviving centroid.  Screening stops
    early (with a warning) if a removal would leave fewer candidates than
    the batch size.
    """
    positions = np.array(_candidate_positions(state), dtype=int)
    n_pool = positions.size
    if n_pool < batch_size:
        raise ValueError("not enough candidates for the initialization batch")
    threshold = max(1.0, gamma * n_pool)
    rng = np.random.default_rng(seed)
    survivors = positions
    removed_all: list[int] = []
    rounds: list[dict] = []
    while True:
        clus = kmeans(pool.features[survivors], batch_size, int(rng.integers(2**63)))
        small = np.flatnonzero(clus.sizes <= threshold)
        if small.size == 0:
            break
        mask = np.isin(clus.assignments, small)
        removed = survivors[mask]
        if survivors.size - removed.size < batch_size:
            warnings.warn(
                "outlier screening stopped early: removing the small clusters "
                "would leave fewer candidates than the batch size",
                RuntimeWarning,
            )
            break
        rounds.append({
            "small_clusters": [int(c) for c in small],
            "removed_positions": [int(p) for p in removed],
        })
        removed_all.extend(int(p) for p in removed)
        survivors = survivors[~mask]
    chosen_positions = []
    for cid in range(batch_size):
        if clus.sizes[cid] == 0:
            continue
        local = closest_to_centroid(pool.features[survivors], clus, cid)
        chosen_positions.append(int(survivors[local]))
    detected = set(removed_all)
    return BatchSelection(
        chosen=[int(pool.ids[p]) for p in chosen_positions],
        chosen_positions=chosen_positions,
        newly_blacklisted={int(pool.ids[p]) for p in detected},
        blacklisted_positions=detected,
        diagnostics={
            "threshold": threshold,
            "rounds": rounds,
            "survivor_positions": [int(p) for p in survivors],
            "assignments": clus.assignments.copy(),
            "centroids": clus.centroids.copy(),
            "detected_outlier_positions": sorted(detected),
        },
    )


def _ranked_by_score(pool: Dataset, candidates, scores) -> np.ndarray:
    """Candidate order by descending score, ties by lowest sample id."""
    ids = pool.ids[np.asarray(candidates, dtype=int)]
    return np.lexsort((ids, -np.asarray(scores, dtype=float)))


def select_top_k(pool: Dataset, state: LabelState, scores, batch_size: int) -> BatchSelection:
    """Plain top-k by score over the unlabeled candidates (ties: lowest id).

    ``scores`` must align with ``sorted(state.unlabeled)``.
    """
    candidates = _candidate_positions(state)
    scores = np.asarray(scores, dtype=float)
    if scores.shape != (len(candidates),):
        raise ValueError("scores must align with the unlabeled candidates")
    if not candidates:
        raise ValueError("no unlabeled samples left")
    order = _ranked_by_score(pool, candidates, scores)
    take = order[: min(batch_size, len(candidates))]
    positions = [candidates[int(i)] for i in take]
    return BatchSelection(
        chosen=[int(pool.ids[p]) for p in positions],
        chosen_positions=positions,
        diagnostics={"candidates": candidates, "scores": scores},
    )


def ebmal_select(pool: Dataset, state: LabelState, scores, batch_size: int, seed: int) -> BatchSelection:
    """Diversity batch: cluster the top-2k candidates, take each cluster's best.

    ``scores`` must align with ``sorted(state.unlabeled)``.  With fewer than
    ``batch_size`` candidates everything is taken without clustering; no
    filler picks are added.
    """
    candidates = _candidate_positions(state)
    scores = np.asarray(scores, dtype=float)
    if scores.shape != (len(candidates),):
        raise ValueError("scores must align with the unlabeled candidates")
    if not candidates:
        raise ValueError("no unlabeled samples left")
    order = _ranked_by_score(pool, candidates, scores)
    diagnostics: dict = {"candidates": candidates, "scores": scores}
    if len(candidates) < batch_size:
        positions = [candidates[int(i)] for i in order]
        diagnostics["short_batch"] = True
        return BatchSelection(
            chosen=[int(pool.ids[p]) for p in positions],
            chosen_positions=positions,
            diagnostics=diagnostics,
        )
    pre = order[: min(2 * batch_size, len(candidates))]
    pre_positions = np.array([candidates[int(i)] for i in pre], dtype=int)
    pre_scores = scores[pre]
    clus = kmeans(pool.features[pre_positions], batch_size, seed)
    chosen_positions = []
    for cid in range(batch_size):
        members = np.flatnonzero(clus.assignments == cid)
        if members.size == 0:
            continue
        member_ids = pool.ids[pre_positions[members]]
        best = members[np.lexsort((member_ids, -pre_scores[members]))[0]]
        chosen_positions.append(int(pre_positions[int(best)]))
    diagnostics.update({
        "preselected_positions": [int(p) for p in pre_positions],
        "preselected_scores": pre_scores.copy(),
        "assignments": clus.assignments.copy(),
    })
    return BatchSelection(
        chosen=[int(pool.ids[p]) for p in chosen_positions],
        chosen_positions=chosen_positions,
        diagnostics=diagnostics,
    )


@dataclass
class StrategyRun:
    """Trajectory of one strategy over a pool: label state, per-batch models
    and the selection records."""

    spec: StrategySpec
    state: LabelState
    models: list[RidgeModel]
    selections: list[BatchSelection]


def _score_candidates(pool: Dataset, state: LabelState, spec: StrategySpec, seed: int) -> np.ndarray:
    candidates = _candidate_positions(state)
    X_lab = pool.features[state.labeled]
    y_lab = pool.targets[state.labeled]
    models = bootstrap_committee(X_lab, y_lab, spec.committee_size, spec.sigma, seed)
    X_cand = pool.features[candidates]
    cp = committee_predict(models, X_cand)
    if spec.base == "qbc":
        return qbc_scores(cp)
    return emcm_scores(cp, X_cand)


def run_strategy(pool: Dataset, spec: StrategySpec, n_batches: int, seed: int) -> StrategyRun:
    """Execute a full selection trajectory of up to ``n_batches`` batches.

    The first batch is representative initialization or a random draw; later
    batches are scored by a bootstrap committee and picked plain top-k or
    with the diversity step.  Outlier screening runs whenever initialization
    or blacklisting is enabled, but the blacklist persists only when the
    blacklist flag is set.  After each batch a ridge model is fit on all
    labeled samples.  Stops early if the pool is exhausted.
    """
    if n_batches < 1:
        raise ValueError("need at least one batch")
    state = LabelState(pool.n)
    models: list[RidgeModel] = []
    selections: list[BatchSelection] = []
    k = spec.batch_size
    for m in range(1, n_batches + 1):
        if not state.unlabeled:
            break
        if m == 1:
            if spec.flags.representative_init or spec.flags.outlier_blacklist:
                init = ebmal_init(pool, state, k, spec.gamma,
                                  seeding.child_seed(seed, seeding.INIT_CLUSTERING))
                if spec.flags.outlier_blacklist:
                    state.blacklist(init.blacklisted_positions)
                else:
                    # screening informed the seeding only; nothing persists
                    init.newly_blacklisted = set()
                    init.blacklisted_positions = set()
                if spec.flags.representative_init:
                    sel = init
                else:
                    sel = select_random(pool, state, k,
                                        seeding.child_seed(seed, seeding.RANDOM_BATCH, 1))
                    sel.newly_blacklisted = init.newly_blacklisted
                    sel.blacklisted_positions = init.blacklisted_positions
                    sel.diagnostics["init_screening"] = init.diagnostics
            else:
                sel = select_random(pool, state, k,
                                    seeding.child_seed(seed, seeding.RANDOM_BATCH, 1))
        elif spec.base == "random":
            sel = select_random(pool, state, k,
                                seeding.child_seed(seed, seeding.RANDOM_BATCH, m))
        else:
            scores = _score_candidates(pool, state, spec,
                                       seeding.child_seed(seed, seeding.BOOTSTRAP, m))
            if spec.flags.diversity:
                sel = ebmal_select(pool, state, scores, k,
                                   seeding.child_seed(seed, seeding.DIVERSITY, m))
            else:
                sel = select_top_k(pool, state, scores, k)
        state.add_batch(sel.chosen_positions)
        models.append(ridge_fit(pool.features[state.labeled], pool.targets[state.labeled], spec.sigma))
        selections.append(sel)
    state.validate()
    return StrategyRun(spec, state, models, selections)
