from src.core.linalg import EigenBasis, derive_basis, full_basis, mahalanobis, mahalanobis_many
from src.core.stats import SuffStats

__all__ = ["SuffStats", "EigenBasis", "derive_basis", "full_basis", "mahalanobis", "mahalanobis_many"]
