"""Run configuration."""

import os
from typing import Any

from pydantic import BaseModel, Field, field_validator, model_validator

from . import __version__
from .entities import Problem
from .sphere_core import MIN_CIRCLE_SAMPLES, SUPPORTED_DIMENSIONS, band_limit_exact


class RunConfig(BaseModel):
    """Experiment configuration, embedded verbatim in every report"""

    # Grid and truncation
    dim_n: int = Field(default=3, description="Ambient dimension (2 or 3)")
    band_limit: int = Field(default=16, ge=0, description="Harmonic band limit L")
    resolution: int = Field(default=40, ge=4, description="Grid resolution")

    # Experiment selection
    problem: Problem = Field(default=Problem.BP5, description="Busemann-Petty problem")
    degrees: list[int] = Field(default=[2, 4, 6, 8], description="Perturbation degrees m")
    t_values: list[float] = Field(
        default=[0.002, 0.004, 0.006, 0.008, 0.01], description="Perturbation sizes t"
    )

    # Tolerances
    tolerance: float = Field(default=1e-5, gt=0, description="Residual acceptance tolerance")
    solver_tol: float = Field(default=1e-12, gt=0, description="Fixed-point stopping increment")
    max_iter: int = Field(default=50, ge=1, description="Fixed-point iteration cap")
    alpha: float = Field(default=0.5, gt=0, lt=1, description="Hölder exponent for diagnostics")
    circle_count: int | None = Field(
        default=None, ge=MIN_CIRCLE_SAMPLES, description="Great-circle samples (2L+2)"
    )

    # Output
    out: str = Field(default="runs", description="Output directory")
    log_dir: str = Field(default="logs", description="Log directory inside the output root")
    seed: int = Field(default=0, description="Random seed")
    threads: int = Field(default=1, ge=1, description="Worker threads for scans")

    @field_validator("dim_n")
    @classmethod
    def _supported_dimension(cls, value: int) -> int:
        if value not in SUPPORTED_DIMENSIONS:
            raise ValueError(f"dimension not implemented: n={value}")
        return value

    @field_validator("t_values")
    @classmethod
    def _increasing_t(cls, value: list[float]) -> list[float]:
        if any(t <= 0 for t in value) or any(b <= a for a, b in zip(value, value[1:], strict=False)):
            raise ValueError("t values must be positive and strictly increasing")
        return value

    @model_validator(mode="after")
    def _band_limit_fits_grid(self) -> "RunConfig":
        if self.dim_n == 2 and self.resolution % 2:
            raise ValueError("resolution must be even for n=2")
        limit = band_limit_exact(self.dim_n, self.resolution) // 2
        if self.band_limit > limit:
            raise ValueError(
                f"aliasing risk: band limit {self.band_limit} exceeds {limit} "
                f"for resolution {self.resolution}"
            )
        return self

    @classmethod
    def from_env(cls, **kwargs) -> "RunConfig":
        """Create config from environment variables; keyword arguments win"""
        config_dict: dict[str, Any] = {}

        threads = os.getenv("SPHERE_RIGIDITY_THREADS")
        if threads:
            config_dict["threads"] = int(threads)
        out = os.getenv("SPHERE_RIGIDITY_OUT")
        if out:
            config_dict["out"] = out
        log_dir = os.getenv("SPHERE_RIGIDITY_LOG_DIR")
        if log_dir:
            config_dict["log_dir"] = log_dir

        config_dict.update({k: v for k, v in kwargs.items() if v is not None})

        return cls(**config_dict)

    def grid_key(self) -> tuple[int, int]:
        return self.dim_n, self.resolution

    def effective_circle_count(self) -> int:
        return self.circle_count or max(2 * self.band_limit + 2, MIN_CIRCLE_SAMPLES)

    def report_header(self) -> dict[str, Any]:
        return {"version": __version__, "config": self.model_dump(mode="json")}
