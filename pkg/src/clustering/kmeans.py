"""
K-means with k-means++ seeding and restarts, used to split irregular
subclusters into smaller pieces.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from src.clustering.dbscan import Partition
from src.errors import InputError, InvariantError

RESTARTS = 3
MAX_ITER = 100


@dataclass
class KMeansResult:
    partition: Partition
    centers: np.ndarray
    sse: float


def _plus_plus_seeds(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    s = X.shape[0]
    chosen = [int(rng.integers(s))]
    closest = ((X - X[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = closest.sum()
        if total > 0.0:
            nxt = int(rng.choice(s, p=closest / total))
        else:
            # every point coincides with a chosen center
            remaining = np.setdiff1d(np.arange(s), chosen)
            nxt = int(rng.choice(remaining))
        chosen.append(nxt)
        closest = np.minimum(closest, ((X - X[nxt]) ** 2).sum(axis=1))
    return X[chosen].copy()


def _lloyd(X: np.ndarray, centers: np.ndarray, max_iter: int):
    k = centers.shape[0]
    prev_sse = np.inf
    for _ in range(max_iter):
        d2 = cdist(X, centers, "sqeuclidean")
        labels = np.argmin(d2, axis=1)
        point_cost = d2[np.arange(X.shape[0]), labels]

        counts = np.bincount(labels, minlength=k)
        for empty in np.flatnonzero(counts == 0):
            # re-seed from the point currently worst served by its center
            far = int(np.argmax(point_cost))
            centers[empty] = X[far]
            labels[far] = empty
            point_cost[far] = 0.0
            counts = np.bincount(labels, minlength=k)

        sse = float(point_cost.sum())
        if sse > prev_sse + 1e-9 * max(1.0, prev_sse):
            raise InvariantError(f"k-means SSE increased from {prev_sse} to {sse}")

        new_centers = centers.copy()
        for c in range(k):
            mask = labels == c
            if mask.any():
                new_centers[c] = X[mask].mean(axis=0)
        converged = np.allclose(new_centers, centers, rtol=0.0, atol=1e-12) or sse == prev_sse
        centers = new_centers
        prev_sse = sse
        if converged:
            break

    d2 = cdist(X, centers, "sqeuclidean")
    labels = np.argmin(d2, axis=1)
    return labels, centers, float(d2[np.arange(X.shape[0]), labels].sum())


def kmeans(points: np.ndarray, k: int, seed: int, restarts: int = RESTARTS,
           max_iter: int = MAX_ITER) -> KMeansResult:
    """
    Lloyd's algorithm from k-means++ seeds; keeps the restart with the lowest
    within-cluster sum of squares.

    Args:
        points: s x p matrix
        k: Number of clusters, 1 <= k <= s
        seed: Seed for the seeding stream (deterministic output)

    Returns:
        KMeansResult whose partition has no noise and ids 1..k
    """
    X = np.asarray(points, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise InputError(f"kmeans needs a non-empty 2-D matrix, got shape {X.shape}")
    if not 1 <= k <= X.shape[0]:
        raise InputError(f"kmeans needs 1 <= k <= {X.shape[0]}, got k={k}")

    rng = np.random.default_rng(seed)
    best = None
    for _ in range(restarts):
        labels, centers, sse = _lloyd(X, _plus_plus_seeds(X, k, rng), max_iter)
        if best is None or sse < best[2]:
            best = (labels, centers, sse)

    labels, centers, sse = best
    # contiguous ids in order of first appearance
    _, first_seen = np.unique(labels, return_index=True)
    order = [int(c) for c in labels[np.sort(first_seen)]]
    remap = np.zeros(k, dtype=np.int64)
    for new_id, old in enumerate(order, start=1):
        remap[old] = new_id
    assignments = remap[labels]
    return KMeansResult(
        partition=Partition(assignments=assignments, k=len(order)),
        centers=centers[order],
        sse=sse,
    )
