"""
Deterministic DBSCAN and the coherence check used to vet subdivided subclusters.
"""

from collections import deque
from dataclasses import dataclass
from typing import Callable, List

import numpy as np
from scipy.spatial import cKDTree

from src.errors import InputError
from src.models.params import DbscanParams

NOISE = 0
_UNVISITED = -1

# Highest dimensionality where "auto" uses the k-d tree.
KDTREE_MAX_DIM = 3


@dataclass
class Partition:
    """Cluster ids 1..k per point, 0 for noise."""
    assignments: np.ndarray
    k: int

    def members(self, cluster_id: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == cluster_id)

    @property
    def noise_count(self) -> int:
        return int(np.count_nonzero(self.assignments == NOISE))

    def groups(self) -> List[np.ndarray]:
        """Member index arrays for clusters 1..k, in id order."""
        return [self.members(c) for c in range(1, self.k + 1)]


def _neighbor_query(X: np.ndarray, eps: float, index: str) -> Callable[[int], np.ndarray]:
    if index == "auto":
        index = "kdtree" if X.shape[1] <= KDTREE_MAX_DIM else "brute"
    if index == "kdtree":
        tree = cKDTree(X)

        def query(i: int) -> np.ndarray:
            return np.asarray(tree.query_ball_point(X[i], eps, return_sorted=True), dtype=np.intp)
        return query
    if index == "brute":
        eps_sq = eps * eps

        def query(i: int) -> np.ndarray:
            diff = X - X[i]
            return np.flatnonzero(np.einsum("ij,ij->i", diff, diff) <= eps_sq)
        return query
    raise InputError(f"unknown neighbor index '{index}'")


def dbscan(points: np.ndarray, params: DbscanParams, index: str = "auto") -> Partition:
    """
    Classic DBSCAN over the closed eps-ball.

    Points are visited in index order; a border point reachable from several
    clusters belongs to the first cluster whose expansion reaches it.

    Args:
        points: s x p matrix
        params: eps and min_pts (query point included)
        index: "auto", "brute" or "kdtree" neighbor search

    Returns:
        Partition with contiguous cluster ids 1..k and 0 for noise
    """
    X = np.asarray(points, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise InputError(f"dbscan needs a non-empty 2-D matrix, got shape {X.shape}")

    s = X.shape[0]
    neighbors = _neighbor_query(X, params.eps, index)
    labels = np.full(s, _UNVISITED, dtype=np.int64)
    cluster = 0

    for i in range(s):
        if labels[i] != _UNVISITED:
            continue
        seeds = neighbors(i)
        if seeds.size < params.min_pts:
            labels[i] = NOISE
            continue

        cluster += 1
        labels[i] = cluster
        queue = deque(seeds)
        while queue:
            j = queue.popleft()
            if labels[j] == NOISE:
                labels[j] = cluster
                continue
            if labels[j] != _UNVISITED:
                continue
            labels[j] = cluster
            reach = neighbors(j)
            if reach.size >= params.min_pts:
                queue.extend(reach[labels[reach] <= NOISE])

    return Partition(assignments=labels, k=cluster)


def coherence_check(points: np.ndarray, params: DbscanParams, index: str = "auto") -> bool:
    """True iff DBSCAN finds exactly one dense cluster; noise points are ignored."""
    return dbscan(points, params, index=index).k == 1
