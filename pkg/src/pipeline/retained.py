"""
Retained-set handling: repeated membership sweeps over the points held in
memory, and DBSCAN clustering of what is left with the determinant guard
and K-means splitting of irregular clusters.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.clustering.dbscan import coherence_check, dbscan
from src.clustering.kmeans import kmeans
from src.core.linalg import is_singular, log_cov_determinant
from src.core.stats import SuffStats
from src.errors import InvariantError
from src.models.params import DbscanParams
from src.pipeline.minicluster import GuardAudit, TemporaryModel, minicluster_make, minicluster_update

logger = logging.getLogger(__name__)


@dataclass
class ClusterCounts:
    created: int = 0     # miniclusters appended
    regular: int = 0     # clusters accepted whole
    split: int = 0       # irregular clusters broken into pieces
    rejected: int = 0    # irregular clusters with no acceptable split
    singular: int = 0    # clusters returned to noise by the singularity check


def retset_memb(model: TemporaryModel, retained: np.ndarray, candidates: Sequence[int],
                audit: Optional[GuardAudit] = None) -> np.ndarray:
    """
    Sweep the retained set through the given miniclusters until no
    minicluster accepts a point or nothing is left; each round only checks
    the miniclusters updated in the round before.
    """
    rows = np.asarray(retained, dtype=np.float64)
    gamma = list(candidates)
    limit = rows.shape[0] + 1
    rounds = 0
    while gamma and rows.shape[0] > 0:
        rounds += 1
        if rounds > limit:
            raise InvariantError(f"retained-set sweep did not terminate within {limit} rounds")
        gamma, rows = minicluster_update(model, rows, gamma, audit)
    return rows


def split_irregular(points: np.ndarray, log_threshold: float, params: DbscanParams, seed: int,
                    max_split: Optional[int] = None) -> Optional[List[np.ndarray]]:
    """
    Smallest K-means split whose pieces are all coherent, non-singular and
    within the determinant threshold.

    K runs from 2 to floor(s / (p + 1)), optionally capped by max_split.
    Returns the pieces, or None when no K qualifies.
    """
    s, p = points.shape
    upper = s // (p + 1)
    if max_split is not None:
        upper = min(upper, max_split)
    for k in range(2, upper + 1):
        pieces = [points[members] for members in kmeans(points, k, seed).partition.groups()]
        if all(_acceptable_piece(piece, log_threshold, params) for piece in pieces):
            return pieces
    return None


def _acceptable_piece(piece: np.ndarray, log_threshold: float, params: DbscanParams) -> bool:
    stats = SuffStats.from_points(piece)
    if is_singular(stats):
        return False
    if log_cov_determinant(stats) > log_threshold:
        return False
    return coherence_check(piece, params)


def retset_clust(model: TemporaryModel, retained: np.ndarray, params: DbscanParams, seed: int = 0,
                 audit: Optional[GuardAudit] = None, max_split: Optional[int] = None,
                 index: str = "auto") -> Tuple[np.ndarray, List[int], ClusterCounts]:
    """
    Cluster the retained set with the original-data DBSCAN parameters and
    turn acceptable clusters into new miniclusters.

    Each cluster is attached to the initial minicluster nearest to its
    centroid; a cluster whose covariance determinant exceeds that initial
    minicluster's threshold is split with K-means or, failing that,
    returned to the retained set with the DBSCAN noise.

    Returns:
        (remaining retained rows in their original order, new minicluster indices, counts)
    """
    rows = np.asarray(retained, dtype=np.float64)
    counts = ClusterCounts()
    if rows.shape[0] == 0:
        return rows, [], counts

    partition = dbscan(rows, params, index=index)
    keep = np.ones(rows.shape[0], dtype=bool)
    created: List[int] = []

    for members in partition.groups():
        points = rows[members]
        stats = SuffStats.from_points(points)
        if is_singular(stats):
            counts.singular += 1
            continue

        nu = model.nearest_initial(stats.mean)
        log_threshold = float(model.log_det_thresholds[nu])
        log_det = log_cov_determinant(stats)

        if log_det <= log_threshold:
            pieces = [points]
            counts.regular += 1
        else:
            pieces = split_irregular(points, log_threshold, params, seed, max_split)
            if pieces is None:
                counts.rejected += 1
                continue
            counts.split += 1

        for piece in pieces:
            if audit is not None:
                audit.record_creation(log_cov_determinant(SuffStats.from_points(piece)), log_threshold)
        created.extend(minicluster_make(model, pieces, nu))
        keep[members] = False

    counts.created = len(created)
    if created:
        logger.debug("retained clustering: %d new miniclusters, %d split, %d rejected, %d singular",
                     counts.created, counts.split, counts.rejected, counts.singular)
    return rows[keep], created, counts
