"""K-Means over standardized contrastive rows with silhouette selection.

Lloyd's algorithm with uniform random-row initialization (k-means++
optional), a fixed number of independent restarts, and deterministic
seeding throughout: the same seed always produces bit-identical results.
Model selection sweeps k over a range and keeps the k with the highest
mean silhouette score.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embeddings import ContrastiveMatrix
from .geometry import pairwise_dists


@dataclass(frozen=True)
class ClusteringResult:
    """Outcome of one k-means fit (best of ``n_init`` restarts)."""

    k: int
    assignments: tuple[int, ...]
    centroids: np.ndarray
    inertia: float
    mean_silhouette: float
    seed: int
    n_init: int
    # per-restart inertia trajectories, one per Lloyd run, used for the
    # monotonicity diagnostics; histories[best_restart][-1] == inertia
    histories: tuple[tuple[float, ...], ...] = ()
    best_restart: int = 0

    def __eq__(self, other):
        if not isinstance(other, ClusteringResult):
            return NotImplemented
        return (
            self.k == other.k
            and self.assignments == other.assignments
            and np.array_equal(self.centroids, other.centroids)
            and self.inertia == other.inertia
            and self.mean_silhouette == other.mean_silhouette
            and self.seed == other.seed
            and self.n_init == other.n_init
            and self.histories == other.histories
            and self.best_restart == other.best_restart
        )


def _init_random(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    rows = rng.choice(x.shape[0], size=k, replace=False)
    return x[rows].copy()


def _init_plusplus(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    closest = ((x - x[chosen[0]]) ** 2).sum(axis=1)
    while len(chosen) < k:
        total = closest.sum()
        if total <= 0.0:
            remaining = [i for i in range(n) if i not in set(chosen)]
            chosen.append(int(rng.choice(remaining)))
        else:
            chosen.append(int(rng.choice(n, p=closest / total)))
        closest = np.minimum(closest, ((x - x[chosen[-1]]) ** 2).sum(axis=1))
    return x[chosen].copy()


def _lloyd(
    x: np.ndarray,
    k: int,
    rng: np.random.Generator,
    init: str,
    max_iter: int,
    tol: float,
) -> tuple[np.ndarray, np.ndarray, list[float]]:
    centroids = _init_plusplus(x, k, rng) if init == "plusplus" else _init_random(x, k, rng)
    history: list[float] = []
    assign = np.zeros(x.shape[0], dtype=np.int64)
    for _ in range(max_iter):
        assign, inertia = _assign_with_repair(x, centroids, k)
        history.append(inertia)
        new_centroids = np.stack([x[assign == c].mean(axis=0) for c in range(k)])
        shift = float(np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max())
        centroids = new_centroids
        if shift < tol:
            break
    assign, inertia = _assign_with_repair(x, centroids, k)
    history.append(inertia)
    return assign, centroids, history


def _assign_with_repair(x, centroids, k):
    """Nearest-centroid assignment; empty clusters steal the point
    farthest from its own centroid (centroid jumps onto that point)."""
    d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    assign = d2.argmin(axis=1)
    own = d2[np.arange(len(x)), assign].copy()
    moved: set[int] = set()
    for empty in range(k):
        if (assign == empty).any():
            continue
        order = np.argsort(-own, kind="stable")
        farthest = next(int(i) for i in order if int(i) not in moved)
        assign[farthest] = empty
        centroids[empty] = x[farthest]
        own[farthest] = 0.0
        moved.add(farthest)
    inertia = float(
        ((x - centroids[assign]) ** 2).sum()
    )
    return assign, inertia


def kmeans(
    matrix: ContrastiveMatrix,
    k: int,
    seed: int,
    n_init: int = 10,
    max_iter: int = 300,
    tol: float = 1e-6,
    init: str = "random",
) -> ClusteringResult:
    """Best-of-``n_init`` Lloyd runs on a standardized matrix.

    Restarts draw from independent child generators spawned from
    ``seed``, so they can be evaluated in any order; the lowest-inertia
    run wins, with ties broken by restart index.
    """
    if not matrix.standardized:
        raise ValueError("kmeans requires a standardized matrix")
    if init not in ("random", "plusplus"):
        raise ValueError(f"unknown init mode: {init!r}")
    x = matrix.values
    n = x.shape[0]
    if k < 1 or k > n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    if n_init < 1:
        raise ValueError("n_init must be positive")
    runs = []
    for child in np.random.SeedSequence(seed).spawn(n_init):
        rng = np.random.default_rng(child)
        runs.append(_lloyd(x, k, rng, init, max_iter, tol))
    best = min(range(n_init), key=lambda i: runs[i][2][-1])
    assign, centroids, _ = runs[best]
    score = silhouette(x, assign) if len(set(assign.tolist())) > 1 else 0.0
    return ClusteringResult(
        k=k,
        assignments=tuple(int(a) for a in assign),
        centroids=centroids,
        inertia=runs[best][2][-1],
        mean_silhouette=score,
        seed=seed,
        n_init=n_init,
        histories=tuple(tuple(h) for _, _, h in runs),
        best_restart=best,
    )


def silhouette(points: np.ndarray, assignments) -> float:
    """Mean silhouette score under Euclidean distance.

    Per point, a is the mean distance to same-cluster points and b the
    smallest mean distance to any other cluster; the score is
    (b - a) / max(a, b), with 0 for singleton clusters (and for
    coincident points where both means vanish).
    """
    x = np.asarray(points, dtype=np.float64)
    labels = np.asarray(assignments, dtype=np.int64)
    if labels.shape[0] != x.shape[0]:
        raise ValueError("assignments length must match points")
    present = np.unique(labels)
    if present.size < 2:
        raise ValueError("silhouette needs at least 2 clusters")
    dists = pairwise_dists(x)
    scores = np.zeros(x.shape[0])
    for i in range(x.shape[0]):
        same = labels == labels[i]
        n_same = int(same.sum())
        if n_same == 1:
            continue
        a = dists[i, same].sum() / (n_same - 1)
        b = min(dists[i, labels == c].mean() for c in present if c != labels[i])
        top = max(a, b)
        if top > 0.0:
            scores[i] = (b - a) / top
    return float(scores.mean())


def select_k(
    matrix: ContrastiveMatrix,
    k_min: int = 2,
    k_max: int = 14,
    seed: int = 0,
    n_init: int = 10,
    max_iter: int = 300,
    tol: float = 1e-6,
    init: str = "random",
) -> tuple[int, dict[int, ClusteringResult]]:
    """Sweep k and pick the highest mean silhouette (ties to smaller k)."""
    n = len(matrix.countries)
    if k_min < 2:
        raise ValueError("k_min must be at least 2")
    if k_min > k_max:
        raise ValueError("k_min must not exceed k_max")
    if k_max > n - 1:
        raise ValueError(f"k_max must be at most rows - 1 = {n - 1}")
    results: dict[int, ClusteringResult] = {}
    best_k = k_min
    for k in range(k_min, k_max + 1):
        results[k] = kmeans(matrix, k, seed, n_init=n_init, max_iter=max_iter, tol=tol, init=init)
        if results[k].mean_silhouette > results[best_k].mean_silhouette:
            best_k = k
    return best_k, results
