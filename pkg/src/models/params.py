"""
Data models for clustering and tuning parameters.
"""

import math
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class DbscanParams(BaseModel):
    """DBSCAN settings. min_pts counts the query point itself."""
    model_config = ConfigDict(frozen=True)

    eps: float = Field(..., gt=0, description="Euclidean neighborhood radius")
    min_pts: int = Field(..., ge=1, description="Neighbors within eps, query point included")

    @field_validator("eps")
    @classmethod
    def eps_finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("eps must be finite")
        return v


class PsoConfig(BaseModel):
    """Request model for the particle swarm search over (eps, min_pts)."""
    swarm: int = Field(default=30, ge=2, description="Number of particles P")
    iters: int = Field(default=50, ge=1, description="Maximum iterations")
    w: float = Field(default=0.72, gt=0, description="Inertia weight")
    c1: float = Field(default=1.49, gt=0, description="Individual acceleration constant")
    c2: float = Field(default=1.49, gt=0, description="Collective acceleration constant")
    seed: int = Field(default=0, description="Seed of the swarm's random stream")
    patience: Optional[int] = Field(
        default=10, ge=1,
        description="Stop after this many iterations without a gbest improvement (None disables)"
    )
    eps_bounds: Optional[Tuple[float, float]] = Field(
        default=None, description="Eps search interval; derived from the k-dist graph when omitted"
    )
    minpts_bounds: Optional[Tuple[int, int]] = Field(
        default=None, description="MinPts search interval; lower bound defaults to floor(ln n)"
    )
    minpts_max: int = Field(default=50, ge=2, description="User-supplied MinPts upper bound")
    n_jobs: int = Field(default=1, description="Concurrent fitness evaluations (joblib semantics)")

    @field_validator("eps_bounds")
    @classmethod
    def eps_interval(cls, v):
        if v is not None and not v[0] < v[1]:
            raise ValueError(f"eps bounds must satisfy low < high, got {v}")
        return v

    @field_validator("minpts_bounds")
    @classmethod
    def minpts_interval(cls, v):
        if v is not None and not (1 <= v[0] < v[1]):
            raise ValueError(f"min_pts bounds must satisfy 1 <= low < high, got {v}")
        return v


class TunedParams(BaseModel):
    """Response model for tuning: sampled-data params and the half-Eps original-data params."""
    sample_params: DbscanParams
    original_params: DbscanParams
    fitness: float = Field(default=float("nan"), description="Cost of sample_params (nan when not searched)")
    method: str = Field(default="manual", description="kdist, pso or manual")

    @classmethod
    def from_sample_params(cls, params: DbscanParams, fitness: float = float("nan"),
                           method: str = "manual") -> "TunedParams":
        original = DbscanParams(eps=params.eps / 2.0, min_pts=params.min_pts)
        return cls(sample_params=params, original_params=original, fitness=fitness, method=method)

    @model_validator(mode="after")
    def half_eps_rule(self) -> "TunedParams":
        if not math.isclose(self.original_params.eps, self.sample_params.eps / 2.0, rel_tol=1e-12):
            raise ValueError("original eps must be half of the sample eps")
        if self.original_params.min_pts != self.sample_params.min_pts:
            raise ValueError("original and sample min_pts must match")
        return self
