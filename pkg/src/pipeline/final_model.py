"""
Final clustering model: miniclusters grouped by their nearest initial
minicluster and merged into one Gaussian cluster per group.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List

import numpy as np

from src.core.linalg import EigenBasis, full_basis, is_singular, mahalanobis_many
from src.core.stats import SuffStats
from src.errors import InfeasibleError, InputError
from src.pipeline.minicluster import Minicluster, TemporaryModel

logger = logging.getLogger(__name__)


@dataclass
class FinalCluster:
    mu: np.ndarray
    sigma: np.ndarray
    size: int  # members absorbed across all merged miniclusters
    basis: EigenBasis

    @classmethod
    def from_moments(cls, mu: np.ndarray, sigma: np.ndarray, size: int) -> "FinalCluster":
        mu = np.asarray(mu, dtype=np.float64)
        sigma = np.asarray(sigma, dtype=np.float64)
        if is_singular(SuffStats.from_moments(max(size, mu.size + 1), mu, sigma)):
            raise InfeasibleError("final cluster covariance is singular")
        return cls(mu=mu, sigma=sigma, size=int(size), basis=full_basis(mu, sigma))


@dataclass
class FinalModel:
    clusters: List[FinalCluster]
    energy: float
    alpha: float
    beta: float
    eta: float

    @property
    def p(self) -> int:
        return self.clusters[0].mu.size

    @property
    def t(self) -> int:
        return len(self.clusters)


def regeneration_count(m: int, rate: float, p: int) -> int:
    """Fresh points drawn for a minicluster of m members: round(rate * m), at least p + 1."""
    return max(int(np.floor(rate * m + 0.5)), p + 1)


def merge_group(group: List[Minicluster], rate: float, beta: float,
                rng: np.random.Generator) -> FinalCluster:
    """
    Merge the miniclusters attached to one initial minicluster.

    A single minicluster is taken over unchanged. Otherwise the mean is the
    size-weighted mean of the minicluster means and the covariance comes from
    regenerating Gaussian points per minicluster, pooling them and discarding
    pool points farther than beta * sqrt(p) from the pool.
    """
    if len(group) == 1:
        mc = group[0]
        return FinalCluster.from_moments(mc.stats.mean, mc.stats.covariance, mc.size)

    p = group[0].stats.p
    sizes = np.array([mc.size for mc in group], dtype=np.float64)
    means = np.vstack([mc.stats.mean for mc in group])
    mu = sizes @ means / sizes.sum()

    pool = np.vstack([
        rng.multivariate_normal(mc.stats.mean, mc.stats.covariance,
                                size=regeneration_count(mc.size, rate, p), method="eigh")
        for mc in group
    ])
    pooled = SuffStats.from_points(pool)
    distances = mahalanobis_many(pool, full_basis(pooled.mean, pooled.covariance))
    survivors = pool[distances <= beta * np.sqrt(p)]
    if survivors.shape[0] < p + 1:
        raise InfeasibleError(
            f"only {survivors.shape[0]} regenerated points survive pruning at beta={beta}; "
            f"need at least {p + 1}, raise beta"
        )
    sigma = SuffStats.from_points(survivors).covariance
    return FinalCluster.from_moments(mu, sigma, int(sizes.sum()))


def build_final_model(model: TemporaryModel, rate: float, beta: float, seed: int) -> FinalModel:
    """
    Build one final cluster per initial minicluster.

    Raises:
        InfeasibleError: an initial minicluster has no attached miniclusters,
            or a regenerated pool is pruned below p + 1 points
    """
    if beta <= 0:
        raise InputError(f"beta must be positive, got {beta}")
    groups: Dict[int, List[Minicluster]] = {i: [] for i in range(model.t_initial)}
    for mc in model.miniclusters:
        if mc.nearest_initial not in groups:
            raise InfeasibleError(f"minicluster attached to unknown initial cluster {mc.nearest_initial + 1}")
        groups[mc.nearest_initial].append(mc)

    streams = np.random.SeedSequence(seed).spawn(model.t_initial)
    clusters = []
    for i in range(model.t_initial):
        if not groups[i]:
            raise InfeasibleError(f"initial cluster {i + 1} has no miniclusters; sampling failed to seed it")
        clusters.append(merge_group(groups[i], rate, beta, np.random.default_rng(streams[i])))
        logger.info("final cluster %d: %d miniclusters, %d members", i + 1, len(groups[i]), clusters[-1].size)

    return FinalModel(clusters=clusters, energy=model.energy, alpha=model.alpha, beta=beta, eta=rate)
