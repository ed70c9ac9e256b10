"""
Dense linear-algebra kernels: principal-component bases, the eigenspace
Mahalanobis distance, covariance determinants and singularity checks.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import linalg

from src.core.stats import SuffStats
from src.errors import InputError

# Relative eigenvalue floor below which a direction counts as degenerate.
SINGULARITY_FLOOR = 1e-10


@dataclass(frozen=True)
class EigenBasis:
    """
    Top-p' principal components of a covariance matrix.

    coeffs is p x p' with unit-norm eigenvectors as columns, sqrt_vars holds
    the square roots of the kept eigenvalues in non-increasing order and
    transformed_mean is the source mean projected onto the columns.
    """
    coeffs: np.ndarray
    sqrt_vars: np.ndarray
    transformed_mean: np.ndarray

    @property
    def p(self) -> int:
        return self.coeffs.shape[0]

    @property
    def p_prime(self) -> int:
        return self.coeffs.shape[1]


def symmetric_eigh(cov: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigendecomposition of the symmetrized matrix, eigenvalues in descending
    order and clamped at 0. Each eigenvector has its largest-magnitude
    component made positive so the result is deterministic.
    """
    cov = np.asarray(cov, dtype=np.float64)
    if not np.all(np.isfinite(cov)):
        raise InputError("covariance has non-finite entries")
    sym = (cov + cov.T) / 2.0
    values, vectors = linalg.eigh(sym)
    values = np.clip(values[::-1], 0.0, None)
    vectors = vectors[:, ::-1]
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return values, vectors * signs


def basis_from_moments(mean: np.ndarray, cov: np.ndarray, energy: float) -> EigenBasis:
    if not 0.0 < energy <= 1.0:
        raise InputError(f"energy must lie in (0, 1], got {energy}")
    values, vectors = symmetric_eigh(cov)
    largest = values[0] if values.size else 0.0
    if largest <= 0.0:
        raise InputError("all eigenvalues are at or below the singularity floor")
    kept = values[values > SINGULARITY_FLOOR * largest]

    cumulative = np.cumsum(kept)
    target = energy * cumulative[-1]
    # relative slack for summation rounding at energy=1.0
    p_prime = int(np.searchsorted(cumulative, target * (1.0 - 1e-12), side="left")) + 1
    p_prime = min(p_prime, kept.size)

    coeffs = vectors[:, :p_prime]
    mean = np.asarray(mean, dtype=np.float64)
    return EigenBasis(
        coeffs=coeffs,
        sqrt_vars=np.sqrt(kept[:p_prime]),
        transformed_mean=mean @ coeffs,
    )


def derive_basis(stats: SuffStats, energy: float) -> EigenBasis:
    """
    Principal-component basis of a point set.

    Args:
        stats: Sufficient statistics with m >= 2
        energy: Share of the total variance the kept components must reach

    Returns:
        EigenBasis with the smallest p' whose cumulative variance share is
        at least `energy`
    """
    if stats.m < 2:
        raise InputError(f"derive_basis needs at least 2 points, have {stats.m}")
    return basis_from_moments(stats.mean, stats.covariance, energy)


def full_basis(mean: np.ndarray, cov: np.ndarray) -> EigenBasis:
    return basis_from_moments(mean, cov, 1.0)


def mahalanobis(x: np.ndarray, basis: EigenBasis) -> float:
    """Square-rooted Mahalanobis distance of one point, measured in the basis' eigenspace."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (basis.p,):
        raise InputError(f"point has dimension {x.shape}, basis has p={basis.p}")
    z = (x @ basis.coeffs - basis.transformed_mean) / basis.sqrt_vars
    return float(np.sqrt(np.dot(z, z)))


def mahalanobis_many(points: np.ndarray, basis: EigenBasis) -> np.ndarray:
    X = np.asarray(points, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != basis.p:
        raise InputError(f"points have shape {X.shape}, basis has p={basis.p}")
    Z = (X @ basis.coeffs - basis.transformed_mean) / basis.sqrt_vars
    return np.sqrt(np.einsum("ij,ij->i", Z, Z))


def cov_determinant(stats: SuffStats) -> float:
    if stats.m < 2:
        raise InputError(f"determinant needs at least 2 points, have {stats.m}")
    values, _ = symmetric_eigh(stats.covariance)
    return float(np.prod(values))


def log_cov_determinant(stats: SuffStats) -> float:
    """Natural log of the covariance determinant; -inf for a degenerate covariance."""
    if stats.m < 2:
        raise InputError(f"determinant needs at least 2 points, have {stats.m}")
    values, _ = symmetric_eigh(stats.covariance)
    if np.any(values <= 0.0):
        return float("-inf")
    return float(np.sum(np.log(values)))


def is_singular(stats: SuffStats) -> bool:
    """
    True when the covariance of the set cannot support a Mahalanobis metric:
    too few points (m <= p), a non-finite eigenvalue, or a smallest eigenvalue
    at or below the relative singularity floor.
    """
    if stats.m <= stats.p:
        return True
    cov = stats.covariance
    if not np.all(np.isfinite(cov)):
        return True
    values = linalg.eigvalsh((cov + cov.T) / 2.0)
    if not np.all(np.isfinite(values)):
        return True
    largest = values[-1]
    if largest <= 0.0:
        return True
    return bool(values[0] <= SINGULARITY_FLOOR * largest)
