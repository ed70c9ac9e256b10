"""
Sorted k-distance graph, knee detection and MinPts heuristics for picking
DBSCAN parameters on the sampled data.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
from scipy.spatial import cKDTree

from src.errors import InputError
from src.models.params import DbscanParams, TunedParams

logger = logging.getLogger(__name__)

# A knee whose chord distance is under this share of the normalized range is not trusted.
LOW_CONFIDENCE_SHARE = 0.01


@dataclass
class KDistGraph:
    k: int
    values: np.ndarray  # descending

    def rows(self):
        """(rank, distance) pairs for the plot CSV, rank starting at 1."""
        return [(rank, float(v)) for rank, v in enumerate(self.values, start=1)]


@dataclass
class KneeResult:
    eps: float
    index: int
    low_confidence: bool
    graph: KDistGraph


def kdist_graph(points: np.ndarray, k: int) -> KDistGraph:
    """
    Distance of every point to its k-th nearest neighbor (the point itself
    excluded), sorted in descending order.
    """
    X = np.asarray(points, dtype=np.float64)
    if X.ndim != 2:
        raise InputError(f"expected a 2-D point matrix, got shape {X.shape}")
    s = X.shape[0]
    if not 1 <= k < s:
        raise InputError(f"k-dist graph needs 1 <= k < s (s={s}), got k={k}")
    # k+1 neighbors include the query point at distance 0
    distances, _ = cKDTree(X).query(X, k=k + 1)
    values = np.sort(distances[:, k])[::-1].copy()
    return KDistGraph(k=k, values=values)


def detect_knee(graph: KDistGraph) -> KneeResult:
    """
    Max-chord-distance knee of the descending curve, on axes normalized to
    [0, 1]. Ties go to the lowest index.
    """
    y = np.asarray(graph.values, dtype=np.float64)
    if y.size < 3:
        raise InputError(f"knee detection needs at least 3 values, got {y.size}")

    x = np.arange(y.size, dtype=np.float64) / (y.size - 1)
    span = y[0] - y[-1]
    if span <= 0.0:
        logger.warning("k-dist curve is flat; knee is arbitrary")
        return KneeResult(eps=float(y[0]) if y[0] > 0 else float("nan"), index=0,
                          low_confidence=True, graph=graph)

    yn = (y - y[-1]) / span
    # chord runs from (0, 1) to (1, 0): x + y - 1 = 0
    distance = np.abs(x + yn - 1.0) / math.sqrt(2.0)
    index = int(np.argmax(distance))
    low = bool(distance[index] < LOW_CONFIDENCE_SHARE)
    if low:
        logger.warning("k-dist knee has low confidence (chord distance %.4g)", distance[index])
    return KneeResult(eps=float(y[index]), index=index, low_confidence=low, graph=graph)


def suggest_min_pts(n: int, p: int) -> Dict[str, int]:
    """Common MinPts starting points: the fixed 4, floor(ln n) and 2p."""
    return {
        "fixed": 4,
        "log_n": max(1, int(math.floor(math.log(n)))) if n > 1 else 1,
        "two_p": 2 * p,
    }


def tune_from_kdist(points: np.ndarray, k: int, eps_override: Optional[float] = None) -> TunedParams:
    """
    Heuristic tuning: eps from the knee of the k-dist graph (or an explicit
    override), MinPts = k + 1, and the half-eps rule for the original data.
    """
    graph = kdist_graph(points, k)
    if eps_override is not None:
        eps = float(eps_override)
    else:
        knee = detect_knee(graph)
        eps = knee.eps
        if not eps > 0.0:
            raise InputError("k-dist knee is at distance 0; pass an explicit eps")
    logger.info("k-dist tuning: k=%d eps=%.6g min_pts=%d", k, eps, k + 1)
    return TunedParams.from_sample_params(DbscanParams(eps=eps, min_pts=k + 1), method="kdist")
