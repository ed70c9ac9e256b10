"""
Cost function for DBSCAN parameter search on the sampled data: the
Davies-Bouldin index plus the CS index plus the outlier ratio, with noise
treated as one more cluster.
"""

import math

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.metrics import davies_bouldin_score

from src.clustering.dbscan import NOISE, dbscan
from src.core.linalg import is_singular
from src.core.stats import SuffStats
from src.models.params import DbscanParams

INFEASIBLE = math.inf

# Aggregation of the three indices, written to every tuning report.
FITNESS_RULE = "db+cs+noise_ratio"

# Rows per block when scanning intra-cluster distances.
_BLOCK = 2048


def davies_bouldin(points: np.ndarray, labels: np.ndarray) -> float:
    """Davies-Bouldin index with Euclidean centroids; every distinct label is a cluster."""
    return float(davies_bouldin_score(points, labels))


def cs_index(points: np.ndarray, labels: np.ndarray) -> float:
    """
    CS index: sum over clusters of the average farthest-member distance,
    divided by the sum over clusters of the distance to the nearest other
    centroid.
    """
    X = np.asarray(points, dtype=np.float64)
    ids = np.unique(labels)
    if ids.size < 2:
        return INFEASIBLE

    spread = 0.0
    centroids = np.empty((ids.size, X.shape[1]))
    for pos, cid in enumerate(ids):
        members = X[labels == cid]
        centroids[pos] = members.mean(axis=0)
        farthest = np.empty(members.shape[0])
        for start in range(0, members.shape[0], _BLOCK):
            block = members[start:start + _BLOCK]
            farthest[start:start + _BLOCK] = cdist(block, members).max(axis=1)
        spread += farthest.mean()

    between = cdist(centroids, centroids)
    np.fill_diagonal(between, np.inf)
    separation = between.min(axis=1).sum()
    if separation <= 0.0:
        return INFEASIBLE
    return float(spread / separation)


def fitness(sample: np.ndarray, params: DbscanParams) -> float:
    """
    Cost of clustering the sample with `params` (lower is better).

    Infinite when every point is noise, when there is no noise at all, or
    when any discovered cluster has a singular covariance.
    """
    X = np.asarray(sample, dtype=np.float64)
    partition = dbscan(X, params)
    noise = partition.noise_count
    if partition.k == 0:
        return INFEASIBLE
    if noise == 0:
        return INFEASIBLE
    for members in partition.groups():
        if is_singular(SuffStats.from_points(X[members])):
            return INFEASIBLE

    labels = partition.assignments
    score = davies_bouldin(X, labels) + cs_index(X, labels) + noise / X.shape[0]
    return float(score) if math.isfinite(score) else INFEASIBLE


def infeasibility_reason(sample: np.ndarray, params: DbscanParams) -> str:
    """Which infinite-cost condition holds ('' when the params are feasible)."""
    X = np.asarray(sample, dtype=np.float64)
    partition = dbscan(X, params)
    if partition.k == 0:
        return "all_noise"
    if partition.noise_count == 0:
        return "no_noise"
    for members in partition.groups():
        if is_singular(SuffStats.from_points(X[members])):
            return "singular_cluster"
    return ""


__all__ = ["fitness", "FITNESS_RULE", "davies_bouldin", "cs_index", "infeasibility_reason", "INFEASIBLE", "NOISE"]
