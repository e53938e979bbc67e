"""Entity classes for experiment records."""

from enum import Enum
from typing import Any

from pydantic import BaseModel, Field


class Problem(str, Enum):
    """Busemann-Petty problem selector"""

    BP5 = "bp5"
    BP8 = "bp8"

    def __str__(self) -> str:
        return self.value


class Parity(str, Enum):
    """Parity of a coefficient table"""

    EVEN = "even"
    ODD = "odd"
    MIXED = "mixed"

    def __str__(self) -> str:
        return self.value


class BPResidual(BaseModel):
    """Residual of a Busemann-Petty equation after fitting its constant"""

    problem: Problem = Field(description="Problem the residual belongs to")
    dim_n: int = Field(description="Ambient dimension")
    l2_residual: float = Field(ge=0.0, description="L²(σ) norm of the residual field")
    sup_residual: float = Field(ge=0.0, description="Maximum of |residual| over the nodes")
    normalization_constant: float = Field(description="Least-squares constant c")
    per_degree_breakdown: dict[int, float] = Field(
        default_factory=dict, description="L² norm of the residual per harmonic degree"
    )

    def passes(self, tolerance: float) -> bool:
        return self.l2_residual <= tolerance


class ScanRow(BaseModel):
    """One (m, t) evaluation of a rigidity scan"""

    problem: Problem
    dim_n: int
    band_limit: int
    degree: int
    t: float
    residual_l2: float | None = None
    residual_sup: float | None = None
    status: str = Field(default="ok", description="ok, or the reason the row was pruned")


class RigidityScanResult(BaseModel):
    """Residual growth along a one-parameter family of perturbed balls"""

    problem: Problem
    dim_n: int
    degree: int
    t_values: list[float]
    residual_values: list[float]
    fitted_slope: float
    predicted_slope: float
    fitted_curvature: float = Field(default=0.0, description="t² coefficient of the residual fit")
    pruned_t: list[float] = Field(default_factory=list)
    rows: list[ScanRow] = Field(default_factory=list)

    @property
    def slope_ratio(self) -> float | None:
        if self.predicted_slope == 0:
            return None
        return self.fitted_slope / self.predicted_slope


class ContractionCheck(BaseModel):
    """min_λ ‖(h - λ) - c𝔐(ρ - r₀)‖ against ‖ρ - r₀‖"""

    lhs: float | None = None
    rhs_ratio: float | None = None
    delta: float = Field(description="max |ρ - r₀| over the nodes")
    flag: str = Field(default="ok", description="'ok' or 'ball' when ρ is constant")


class IterationRecord(BaseModel):
    step: int
    increment_l2: float
    increment_c2_alpha: float


class MASolveRecord(BaseModel):
    """Serializable view of a Monge-Ampère solver trace"""

    dim_n: int
    band_limit: int
    alpha: float
    gamma_l2: float
    gamma_sup: float
    gamma_holder: float
    iterations: list[IterationRecord] = Field(default_factory=list)
    converged: bool
    final_residual: float
    phi_prime_l2: float
    phi_double_prime_l2: float
    contraction_rate: float | None = None


class CapInequalityInstance(BaseModel):
    angle: float
    vartheta: float
    lhs: float
    rhs: float


class CapInequalityResult(BaseModel):
    """Outcome of the explicit 35/ϑ cap inequality over a family of 2-D bodies"""

    bodies: int
    instances: int
    violations: list[CapInequalityInstance] = Field(default_factory=list)
    worst_ratio: float = Field(description="max lhs / rhs over all admissible instances")

    @property
    def holds(self) -> bool:
        return not self.violations


class CapAverageInstance(BaseModel):
    center: list[float]
    vartheta: float
    deviation: float = Field(description="|h(e) - R|")
    cap_average: float = Field(description="σ-average of |h - R| over S_ϑ(e)")
    bound: float = Field(description="explicit constant C(ϑ) at this angle")


class CapAverageResult(BaseModel):
    """|ω(e)| against the cap average of |ω| on S_ϑ(e) over a family of bodies"""

    dim_n: int
    bodies: int
    instances: int
    rejected_bodies: int = 0
    worst_ratio: float = Field(description="measured constant: max deviation / cap average")
    worst_vartheta: float | None = None
    violations: list[CapAverageInstance] = Field(default_factory=list)

    @property
    def holds(self) -> bool:
        return not self.violations


class LipschitzResult(BaseModel):
    delta: float
    bound: float
    max_ratio: float

    @property
    def holds(self) -> bool:
        return self.max_ratio <= self.bound


class ExperimentReport(BaseModel):
    """Envelope written by every CLI command"""

    command: str
    version: str
    config: dict[str, Any]
    passed: bool | None = None
    result: dict[str, Any] = Field(default_factory=dict)
    warnings: list[str] = Field(default_factory=list)
