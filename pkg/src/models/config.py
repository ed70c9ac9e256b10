"""
Data models for run configuration.

Values are resolved in order: command-line flags, then the key=value config
file, then SDCOR_* environment variables, then built-in defaults.
"""

import os
from typing import Any, Dict, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.errors import InputError
from src.models.params import DbscanParams, PsoConfig, TunedParams


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"environment variable {name} must be an integer, got {raw!r}") from None


def default_seed() -> int:
    return _env_int("SDCOR_SEED", 0)


def default_chunks() -> int:
    return _env_int("SDCOR_CHUNKS", 10)


class RunConfig(BaseModel):
    """Inputs of one detector run: algorithm parameters, tuning and file locations."""
    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    eta: float = Field(default=0.01, gt=0, le=1, description="Random sampling rate")
    lam: float = Field(default=1.0, gt=0, le=1, alias="lambda",
                       description="Share of the total variance kept by the principal components")
    alpha: float = Field(default=2.0, gt=0, description="Membership threshold (radius alpha * sqrt(p'))")
    beta: float = Field(default=2.0, gt=0, description="Pruning threshold (radius beta * sqrt(p))")
    chunks: int = Field(default_factory=default_chunks, ge=1, description="Number of chunks per pass")
    chunk_rows: Optional[int] = Field(default=None, ge=1, description="Rows per chunk (overrides chunks)")
    seed: int = Field(default_factory=default_seed, description="Seed for sampling, splitting and regeneration")

    eps: Optional[float] = Field(default=None, gt=0, description="DBSCAN Eps for the sampled data")
    min_pts: Optional[int] = Field(default=None, ge=1, description="DBSCAN MinPts")
    auto_tune: bool = Field(default=False, description="Tune Eps/MinPts on the sample when not given")
    tune: Literal["kdist", "pso"] = Field(default="kdist", description="Tuning method for auto_tune")
    k: int = Field(default=3, ge=1, description="Neighbor rank of the k-dist graph (MinPts = k + 1)")
    swarm: int = Field(default=30, ge=2, description="PSO swarm size")
    iters: int = Field(default=50, ge=1, description="PSO iterations")
    minpts_max: int = Field(default=50, ge=2, description="PSO MinPts upper bound")
    n_jobs: int = Field(default=1, description="Concurrent PSO fitness evaluations")

    max_split: Optional[int] = Field(default=None, ge=2, description="Cap on K for splitting irregular clusters")
    chunk_order: Literal["natural", "reversed"] = Field(default="natural", description="Chunk visiting order")
    index: Literal["auto", "brute", "kdtree"] = Field(default="auto", description="DBSCAN neighbor search")
    label_column: bool = Field(default=False, description="Last dataset column holds 0/1 labels")

    data: Optional[str] = Field(default=None, description="Dataset CSV")
    model: Optional[str] = Field(default=None, description="Final model JSON (written, or read with score_only)")
    scores: Optional[str] = Field(default=None, description="Score table CSV")
    report: Optional[str] = Field(default=None, description="key=value run report")
    log: Optional[str] = Field(default=None, description="Per-chunk run log CSV")
    retained: Optional[str] = Field(default=None, description="Temporary-outlier sidecar CSV")
    sample_indices: Optional[str] = Field(default=None, description="Sampled row indices, one per line")
    score_only: bool = Field(default=False, description="Skip phases 1-2 and score with a saved model")

    @model_validator(mode="after")
    def eps_and_min_pts_together(self) -> "RunConfig":
        if (self.eps is None) != (self.min_pts is None):
            raise ValueError("eps and min_pts must be given together")
        return self

    @classmethod
    def resolve(cls, file_values: Optional[Dict[str, Any]] = None,
                overrides: Optional[Dict[str, Any]] = None) -> "RunConfig":
        """Config-file values overridden by non-None flag values; the rest from env and defaults."""
        values: Dict[str, Any] = dict(file_values or {})
        for key, value in (overrides or {}).items():
            if value is not None:
                values[key] = value
        unknown = set(values) - set(cls.model_fields) - {"lambda"}
        if unknown:
            raise InputError(f"unknown configuration keys: {', '.join(sorted(unknown))}")
        return cls.model_validate(values)

    def given_params(self) -> Optional[TunedParams]:
        if self.eps is None:
            return None
        return TunedParams.from_sample_params(DbscanParams(eps=self.eps, min_pts=self.min_pts))

    def pso_config(self) -> PsoConfig:
        return PsoConfig(swarm=self.swarm, iters=self.iters, seed=self.seed,
                         minpts_max=self.minpts_max, n_jobs=self.n_jobs)

    def check_paths(self) -> None:
        """Input files must exist; output directories must exist."""
        if self.data is not None and not os.path.isfile(self.data):
            raise InputError(f"dataset file not found: {self.data}")
        if self.score_only and (self.model is None or not os.path.isfile(self.model)):
            raise InputError(f"score-only runs need an existing model file, got {self.model}")
        outputs = [self.scores, self.report, self.log, self.retained, self.sample_indices]
        if not self.score_only:
            outputs.append(self.model)
        for path in outputs:
            if path is None:
                continue
            folder = os.path.dirname(os.path.abspath(path))
            if not os.path.isdir(folder):
                raise InputError(f"output directory does not exist: {folder}")
