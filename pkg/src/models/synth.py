"""
Data models for synthetic dataset generation.
"""

from typing import List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator


class GenSpec(BaseModel):
    """Request model for the Gaussian-cluster generator with shell-injected outliers."""
    clusters: int = Field(..., ge=1, description="Number of Gaussian clusters")
    points_per_cluster: List[int] = Field(..., description="Inliers per cluster (after pruning)")
    p: int = Field(..., ge=1, description="Dimensionality")
    outlier_fraction: float = Field(
        default=0.01, ge=0, lt=1, description="Share of all rows that are outliers"
    )
    n_outliers: Optional[int] = Field(
        default=None, ge=0, description="Exact outlier count (overrides outlier_fraction)"
    )
    inner_radius_mult: float = Field(default=4.0, gt=0, description="Outlier shell inner radius / sqrt(p)")
    outer_radius_mult: float = Field(default=6.0, gt=0, description="Outlier shell outer radius / sqrt(p)")
    prune_radius_mult: float = Field(default=1.0, gt=0, description="Inlier pruning radius / sqrt(p)")
    sampler: Literal["auto", "hypercube", "shell"] = Field(
        default="auto", description="Outlier placement: box rejection or direct shell sampling"
    )
    seed: int = Field(default=0, description="Generator seed")

    @field_validator("points_per_cluster")
    @classmethod
    def counts_positive(cls, v: List[int]) -> List[int]:
        if not v or any(c < 1 for c in v):
            raise ValueError("every cluster needs at least one point")
        return v

    @model_validator(mode="after")
    def consistent(self) -> "GenSpec":
        if len(self.points_per_cluster) == 1 and self.clusters > 1:
            self.points_per_cluster = self.points_per_cluster * self.clusters
        if len(self.points_per_cluster) != self.clusters:
            raise ValueError(
                f"points_per_cluster has {len(self.points_per_cluster)} entries for {self.clusters} clusters"
            )
        if not self.inner_radius_mult < self.outer_radius_mult:
            raise ValueError("inner radius multiplier must be below the outer one")
        return self

    @property
    def inliers(self) -> int:
        return sum(self.points_per_cluster)

    @property
    def outliers(self) -> int:
        """Exact count, or round(f * N) with N the total row count implied by the inliers."""
        if self.n_outliers is not None:
            return self.n_outliers
        f = self.outlier_fraction
        return int(round(f * self.inliers / (1.0 - f)))

    @classmethod
    def from_total(cls, clusters: int, p: int, n: int, outlier_fraction: float, seed: int = 0,
                   **kwargs) -> "GenSpec":
        """
        Spec for n rows in total: round(f * n) outliers, the rest split as
        evenly as possible across the clusters.
        """
        outliers = int(round(outlier_fraction * n))
        inliers = n - outliers
        base, extra = divmod(inliers, clusters)
        counts = [base + (1 if i < extra else 0) for i in range(clusters)]
        return cls(clusters=clusters, points_per_cluster=counts, p=p, outlier_fraction=outlier_fraction,
                   n_outliers=outliers, seed=seed, **kwargs)
