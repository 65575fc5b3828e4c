"""Lloyd k-means with k-means++ seeding; the workhorse of every enhancement."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Clustering", "kmeans", "closest_to_centroid"]

MAX_ITERATIONS = 100


@dataclass(frozen=True)
class Clustering:
    """Result of one k-means run.

    ``inertia_trace`` records the inertia after every assignment step; Lloyd
    guarantees it is non-increasing and the implementation asserts that each
    iteration.
    """

    assignments: np.ndarray
    centroids: np.ndarray
    sizes: np.ndarray
    inertia: float
    inertia_trace: tuple[float, ...]
    converged: bool


def _sq_dists(X: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    diff = X[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _kmeanspp(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centroids = np.empty((k, X.shape[1]))
    centroids[0] = X[int(rng.integers(n))]
    closest = np.einsum("nd,nd->n", X - centroids[0], X - centroids[0])
    for i in range(1, k):
        total = float(closest.sum())
        if total > 0.0:
            idx = int(rng.choice(n, p=closest / total))
        else:
            idx = int(rng.integers(n))
        centroids[i] = X[idx]
        d_new = np.einsum("nd,nd->n", X - centroids[i], X - centroids[i])
        np.minimum(closest, d_new, out=closest)
    return centroids


def _repair_empty(X, assign, centroids, D):
    """Reseed each empty centroid at the point farthest from its own centroid.

    Points that are sole members of their cluster stay put so the repair
    cannot create new empties.
    """
    n, k = D.shape
    for _ in range(k):
        sizes = np.bincount(assign, minlength=k)
        empty = np.flatnonzero(sizes == 0)
        if empty.size == 0:
            break
        own = D[np.arange(n), assign]
        movable = sizes[assign] > 1
        if not movable.any():
            break  # fewer distinct points than clusters; accept the empties
        far = int(np.argmax(np.where(movable, own, -np.inf)))
        e = int(empty[0])
        centroids = centroids.copy()
        centroids[e] = X[far]
        diff = X - centroids[e]
        D = D.copy()
        D[:, e] = np.einsum("nd,nd->n", diff, diff)
        assign = assign.copy()
        assign[far] = e
    return assign, centroids, D


def kmeans(X, k: int, seed: int, max_iter: int = MAX_ITERATIONS, init=None) -> Clustering:
    """Cluster rows of ``X`` into ``k`` groups with Lloyd's algorithm.

    Seeding is k-means++ unless explicit ``init`` centroids are given.
    Deterministic for a fixed seed; assignment ties go to the lowest cluster
    id; empty clusters are reseeded at the farthest point from its centroid.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be a 2-D matrix")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite values")
    n = X.shape[0]
    k = int(k)
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    rng = np.random.default_rng(seed)
    if init is None:
        centroids = _kmeanspp(X, k, rng)
    else:
        centroids = np.array(init, dtype=float)
        if centroids.shape != (k, X.shape[1]):
            raise ValueError("init centroids must be a k-by-d matrix")
    prev_assign = None
    trace: list[float] = []
    converged = False
    for _ in range(max_iter):
        D = _sq_dists(X, centroids)
        assign = np.argmin(D, axis=1)  # ties -> lowest cluster id
        assign, centroids, D = _repair_empty(X, assign, centroids, D)
        inertia = float(D[np.arange(n), assign].sum())
        if trace:
            assert inertia <= trace[-1] + 1e-9 * max(1.0, trace[-1]), (
                f"inertia increased: {trace[-1]} -> {inertia}"
            )
        trace.append(inertia)
        if prev_assign is not None and np.array_equal(assign, prev_assign):
            converged = True
            break
        prev_assign = assign
        new_centroids = centroids.copy()
        for i in range(k):
            members = assign == i
            if members.any():
                new_centroids[i] = X[members].mean(axis=0)
        centroids = new_centroids
    sizes = np.bincount(assign, minlength=k)
    return Clustering(assign, centroids, sizes, trace[-1], tuple(trace), converged)


def closest_to_centroid(X, clustering: Clustering, cluster_id: int) -> int:
    """Index of the cluster member nearest its centroid; ties take the lowest index."""
    X = np.asarray(X, dtype=float)
    members = np.flatnonzero(clustering.assignments == cluster_id)
    if members.size == 0:
        raise ValueError(f"cluster {cluster_id} is empty")
    diff = X[members] - clustering.centroids[cluster_id]
    dists = np.einsum("nd,nd->n", diff, diff)
    return int(members[int(np.argmin(dists))])
