"""
Data models for the persisted final clustering model.
"""

from typing import List, Literal

from pydantic import BaseModel, Field, model_validator

MODEL_FORMAT = "sdcor-final-model"
MODEL_VERSION = 1


class ClusterDocument(BaseModel):
    """One final cluster: mean and row-major covariance."""
    size: int = Field(..., ge=1, description="Members absorbed across the merged miniclusters")
    mu: List[float] = Field(..., description="Mean vector, length p")
    sigma: List[float] = Field(..., description="Covariance matrix, row-major, length p*p")


class FinalModelDocument(BaseModel):
    """Self-describing final model file."""
    format: Literal["sdcor-final-model"] = Field(default=MODEL_FORMAT, description="Format tag")
    version: Literal[1] = Field(default=MODEL_VERSION, description="Format version")
    p: int = Field(..., ge=1, description="Dimensionality")
    t: int = Field(..., ge=1, description="Number of final clusters")
    lam: float = Field(..., alias="lambda", description="Share of the total variance kept per minicluster")
    alpha: float = Field(..., description="Membership threshold used while clustering")
    beta: float = Field(..., description="Pruning threshold used for regeneration")
    eta: float = Field(..., description="Sampling rate")
    clusters: List[ClusterDocument]

    model_config = {"populate_by_name": True}

    @model_validator(mode="after")
    def shapes(self) -> "FinalModelDocument":
        if len(self.clusters) != self.t:
            raise ValueError(f"model declares t={self.t} but holds {len(self.clusters)} clusters")
        for i, c in enumerate(self.clusters, start=1):
            if len(c.mu) != self.p or len(c.sigma) != self.p * self.p:
                raise ValueError(f"cluster {i} does not match p={self.p}")
        return self
