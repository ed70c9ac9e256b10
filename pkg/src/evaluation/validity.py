"""
External clustering validity: purity, Mirkin metric, F-measure, entropy
and variation of information between a clustering and the ground truth,
plus extraction of the top-o anomaly cluster from a score table.

Natural logarithms throughout; 0 * log(0) terms count as 0.
"""

import math
from dataclasses import dataclass
from typing import Dict

import numpy as np
from sklearn.metrics.cluster import contingency_matrix

from src.errors import InputError
from src.storage.scores import ScoreTable


@dataclass
class PartitionPair:
    predicted: np.ndarray  # cluster id per element
    truth: np.ndarray      # class id per element

    def __post_init__(self):
        self.predicted = np.asarray(self.predicted, dtype=np.int64)
        self.truth = np.asarray(self.truth, dtype=np.int64)
        if self.predicted.shape != self.truth.shape or self.predicted.ndim != 1:
            raise InputError("predicted and truth partitions must have the same length")
        if self.predicted.size == 0:
            raise InputError("partitions are empty")
        if self.predicted.min() < 1 or self.truth.min() < 1:
            raise InputError("every element must be assigned in both partitions (ids >= 1)")

    @property
    def n(self) -> int:
        return int(self.predicted.size)

    def table(self) -> np.ndarray:
        """Contingency counts, clusters as rows and classes as columns."""
        return contingency_matrix(self.predicted, self.truth).astype(np.float64)


def purity(pp: PartitionPair) -> float:
    return float(pp.table().max(axis=1).sum() / pp.n)


def mirkin(pp: PartitionPair) -> float:
    t = pp.table()
    sizes_c = t.sum(axis=1)
    sizes_d = t.sum(axis=0)
    return float((np.sum(sizes_c ** 2) + np.sum(sizes_d ** 2) - 2.0 * np.sum(t ** 2)) / pp.n ** 2)


def f_measure(pp: PartitionPair) -> float:
    t = pp.table()
    sizes_c = t.sum(axis=1, keepdims=True)
    sizes_d = t.sum(axis=0, keepdims=True)
    precision = t / sizes_c
    recall = t / sizes_d
    total = precision + recall
    f = np.divide(2.0 * precision * recall, total, out=np.zeros_like(t), where=total > 0)
    return float(np.sum(sizes_c[:, 0] / pp.n * f.max(axis=1)))


def entropy(pp: PartitionPair) -> float:
    """Size-weighted cluster entropies, each normalized by log(l); 0 when there is one class."""
    t = pp.table()
    l = t.shape[1]
    if l == 1:
        return 0.0
    sizes_c = t.sum(axis=1, keepdims=True)
    share = t / sizes_c
    terms = np.where(share > 0, share * np.log(np.where(share > 0, share, 1.0)), 0.0)
    per_cluster = -terms.sum(axis=1) / math.log(l)
    return float(np.sum(sizes_c[:, 0] / pp.n * per_cluster))


def vi(pp: PartitionPair) -> float:
    """Variation of information normalized by n * log(n); 0 for a single element."""
    n = pp.n
    if n == 1:
        return 0.0
    t = pp.table()
    sizes_c = t.sum(axis=1, keepdims=True)
    sizes_d = t.sum(axis=0, keepdims=True)
    nz = t > 0
    ratio = np.where(nz, (sizes_c * sizes_d) / np.where(nz, t, 1.0) ** 2, 1.0)
    return float(np.sum(t * np.log(ratio)) / (n * math.log(n)))


def all_validity(pp: PartitionPair) -> Dict[str, float]:
    return {
        "purity": purity(pp),
        "mirkin": mirkin(pp),
        "f_measure": f_measure(pp),
        "entropy": entropy(pp),
        "vi": vi(pp),
    }


def extract_outlier_partition(table: ScoreTable, o: int) -> np.ndarray:
    """
    Clustering in row-index order where the o highest-scored rows form one
    anomaly cluster (ties at the cut go to the lowest row index) and the
    other rows keep their final cluster, renumbered 1..k' in ascending id
    order. The anomaly cluster gets id k' + 1.
    """
    n = table.n
    if not 0 < o < n:
        raise InputError(f"top-o must satisfy 0 < o < n={n}, got {o}")
    rows = table.in_row_order()
    order = np.lexsort((rows.index, -rows.score))
    anomalous = np.zeros(n, dtype=bool)
    anomalous[order[:o]] = True

    normal_ids = np.unique(rows.cluster[~anomalous])
    remap = {int(c): i for i, c in enumerate(normal_ids, start=1)}
    partition = np.empty(n, dtype=np.int64)
    partition[~anomalous] = [remap[int(c)] for c in rows.cluster[~anomalous]]
    partition[anomalous] = len(normal_ids) + 1
    return partition


def truth_partition_from_labels(labels: np.ndarray) -> np.ndarray:
    """Two-class truth from binary labels: 1 for inliers, 2 for outliers."""
    labels = np.asarray(labels, dtype=np.int64)
    return np.where(labels == 1, 2, 1)
