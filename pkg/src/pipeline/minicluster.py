"""
Temporary clustering model: miniclusters, creation, and membership updates.

Minicluster indices are 0-based. The first t_initial entries are the
initial miniclusters discovered on the sample; nearest_initial always
refers to one of them.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.core.linalg import EigenBasis, derive_basis, is_singular, mahalanobis_many
from src.core.stats import SuffStats
from src.errors import InputError, InvariantError

logger = logging.getLogger(__name__)

# Slack for floating-point noise in the guard re-checks.
_GUARD_RTOL = 1e-9


@dataclass
class Minicluster:
    stats: SuffStats
    basis: EigenBasis
    nearest_initial: int

    @property
    def size(self) -> int:
        return self.stats.m

    def radius(self, alpha: float) -> float:
        """Accepted Mahalanobis radius alpha * sqrt(p')."""
        return alpha * math.sqrt(self.basis.p_prime)

    def refresh(self, energy: float) -> None:
        self.basis = derive_basis(self.stats, energy)


@dataclass
class GuardAudit:
    """
    Run-time record of the membership and determinant guards.

    Every absorption and every creation is re-checked here independently
    of the code path that made the decision.
    """
    absorptions: int = 0
    creations: int = 0
    max_absorb_ratio: float = 0.0       # distance / radius over all absorptions
    max_creation_log_margin: float = -math.inf  # log det - log threshold over all guarded creations

    def record_absorptions(self, distances: np.ndarray, radii: np.ndarray) -> None:
        if distances.size == 0:
            return
        ratio = float(np.max(distances / radii))
        if ratio > 1.0 + _GUARD_RTOL:
            raise InvariantError(f"membership guard violated: distance/radius = {ratio}")
        self.absorptions += int(distances.size)
        self.max_absorb_ratio = max(self.max_absorb_ratio, ratio)

    def record_creation(self, log_det: float, log_threshold: float) -> None:
        margin = log_det - log_threshold
        if margin > _GUARD_RTOL * max(1.0, abs(log_threshold)):
            raise InvariantError(
                f"determinant guard violated: log det {log_det} exceeds log threshold {log_threshold}"
            )
        self.creations += 1
        self.max_creation_log_margin = max(self.max_creation_log_margin, margin)

    def as_dict(self) -> dict:
        return {
            "absorptions": self.absorptions,
            "creations": self.creations,
            "max_absorb_ratio": self.max_absorb_ratio,
            "max_creation_log_margin": self.max_creation_log_margin,
        }


@dataclass
class TemporaryModel:
    energy: float
    alpha: float
    p: int
    miniclusters: List[Minicluster] = field(default_factory=list)
    t_initial: int = 0
    log_det_thresholds: np.ndarray = field(default_factory=lambda: np.empty(0))
    initial_size: int = 0  # points absorbed at sampling time

    @property
    def size(self) -> int:
        return len(self.miniclusters)

    @property
    def det_thresholds(self) -> np.ndarray:
        """Covariance determinants of the initial miniclusters (may underflow to 0 in high dimensions)."""
        return np.exp(self.log_det_thresholds)

    @property
    def absorbed(self) -> int:
        return sum(mc.size for mc in self.miniclusters)

    def initial(self) -> List[Minicluster]:
        return self.miniclusters[:self.t_initial]

    def nearest_initial(self, point: np.ndarray) -> int:
        """Index of the initial minicluster closest to `point` (ties go to the lowest index)."""
        x = np.asarray(point, dtype=np.float64).reshape(1, -1)
        distances = [mahalanobis_many(x, mc.basis)[0] for mc in self.initial()]
        return int(np.argmin(distances))


def minicluster_make(model: TemporaryModel, groups: Sequence[np.ndarray],
                     nu: Optional[int] = None) -> List[int]:
    """
    Append one minicluster per group of in-memory points.

    Args:
        model: Temporary model, modified in place
        groups: Point matrices, each with at least 2 rows and a non-singular covariance
        nu: Nearest initial minicluster for every new entry; None during sampling,
            where group i becomes initial minicluster i

    Returns:
        Indices of the new miniclusters
    """
    start = model.size
    if nu is None and start != 0:
        raise InputError("sampling-stage creation needs an empty model")
    created = []
    for i, points in enumerate(groups):
        stats = SuffStats.from_points(points)
        if stats.m < 2 or is_singular(stats):
            raise InputError(f"group {i} of {stats.m} points is singular; filter it out before creation")
        model.miniclusters.append(Minicluster(
            stats=stats,
            basis=derive_basis(stats, model.energy),
            nearest_initial=start + i if nu is None else int(nu),
        ))
        created.append(start + i)
    return created


def minicluster_update(model: TemporaryModel, points: np.ndarray, candidates: Sequence[int],
                       audit: Optional[GuardAudit] = None) -> Tuple[List[int], np.ndarray]:
    """
    Assign each point to its nearest candidate minicluster when it lies within
    that minicluster's accepted radius.

    Distances are measured against the bases as they were when the call
    began; bases of miniclusters that accepted points are re-derived after
    all points are decided.

    Returns:
        (sorted indices of updated miniclusters, leftover points in input order)
    """
    X = np.asarray(points, dtype=np.float64)
    gamma = sorted(set(int(c) for c in candidates))
    if X.shape[0] == 0 or not gamma:
        return [], X

    if any(not 0 <= c < model.size for c in gamma):
        raise InputError(f"candidate index out of range for a model of {model.size} miniclusters")

    distances = np.column_stack([mahalanobis_many(X, model.miniclusters[c].basis) for c in gamma])
    radii = np.array([model.miniclusters[c].radius(model.alpha) for c in gamma])
    best = np.argmin(distances, axis=1)  # first minimum: lowest index
    nearest = distances[np.arange(X.shape[0]), best]
    accepted = nearest <= radii[best]

    if audit is not None:
        audit.record_absorptions(nearest[accepted], radii[best[accepted]])

    updated = []
    for pos in np.unique(best[accepted]):
        mc = model.miniclusters[gamma[pos]]
        mc.stats.add_points(X[accepted & (best == pos)])
        updated.append(gamma[pos])
    for c in updated:
        model.miniclusters[c].refresh(model.energy)

    return updated, X[~accepted]


def log_initial_model(model: TemporaryModel) -> None:
    for i, mc in enumerate(model.initial()):
        logger.info("initial minicluster %d: m=%d p'=%d log det=%.6g",
                    i + 1, mc.size, mc.basis.p_prime, model.log_det_thresholds[i])
