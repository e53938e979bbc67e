"""Picard iteration for the Monge-Ampère equation A(1 + φ) = 1 + γ near the ball.

With P(φ) = A(1 + φ) - 1 - Δ̃φ the iteration reads

    Δ̃φ₀ = γ,    Δ̃φ_{m+1} = γ - P(φ_m),

and the limit splits as φ = φ′ + φ″ with φ′ = φ₀ the linear part.
"""

import math
from contextlib import nullcontext
from dataclasses import dataclass, field

import numpy as np

from .entities import IterationRecord, MASolveRecord
from .errors import SolverDivergenceError, SphereRigidityError
from .harmonics import (
    HarmonicCoeffs,
    analyze,
    c2_alpha_estimate,
    holder_seminorm,
    l2_norm,
    sup_norm,
    synthesize,
)
from .logger import ExperimentLogger
from .operators import laplace_apply, laplace_solve, ma_remainder_P, monge_ampere
from .sphere_core import SphericalGrid, l2_field_norm

DIVERGENCE_STREAK = 3
RATE_FLOOR = 1e-6


@dataclass
class MASolveTrace:
    dim_n: int
    band_limit: int
    alpha: float
    gamma_l2: float
    gamma_sup: float
    gamma_holder: float
    phi: HarmonicCoeffs
    phi_prime: HarmonicCoeffs
    increments: list[float] = field(default_factory=list)
    c2_alpha: list[float] = field(default_factory=list)
    converged: bool = False
    final_residual: float = math.nan

    @property
    def iterations(self) -> int:
        return len(self.increments)

    @property
    def phi_double_prime(self) -> HarmonicCoeffs:
        return self.phi - self.phi_prime

    def to_record(self) -> MASolveRecord:
        try:
            rate: float | None = contraction_rate(self)
        except SphereRigidityError:
            rate = None
        return MASolveRecord(
            dim_n=self.dim_n,
            band_limit=self.band_limit,
            alpha=self.alpha,
            gamma_l2=self.gamma_l2,
            gamma_sup=self.gamma_sup,
            gamma_holder=self.gamma_holder,
            iterations=[
                IterationRecord(step=i + 1, increment_l2=d, increment_c2_alpha=c)
                for i, (d, c) in enumerate(zip(self.increments, self.c2_alpha, strict=True))
            ],
            converged=self.converged,
            final_residual=self.final_residual,
            phi_prime_l2=l2_norm(self.phi_prime),
            phi_double_prime_l2=l2_norm(self.phi_double_prime),
            contraction_rate=rate,
        )


def _as_gamma(grid: SphericalGrid, gamma: HarmonicCoeffs | np.ndarray, band_limit: int) -> HarmonicCoeffs:
    if isinstance(gamma, HarmonicCoeffs):
        if gamma.dim_n != grid.dim_n:
            raise SphereRigidityError("γ and grid disagree on the dimension")
        return gamma.with_band_limit(band_limit)
    return analyze(grid, np.asarray(gamma, dtype=float), band_limit)


def equation_residual(grid: SphericalGrid, phi: HarmonicCoeffs, gamma: HarmonicCoeffs) -> float:
    """‖A(1 + φ) - (1 + γ)‖ in L²(σ)"""
    curvature = monge_ampere(grid, phi.plus_constant(1.0))
    return l2_field_norm(grid, curvature - 1.0 - synthesize(gamma, grid))


def ma_solve(
    grid: SphericalGrid,
    gamma: HarmonicCoeffs | np.ndarray,
    band_limit: int | None = None,
    alpha: float = 0.5,
    max_iter: int = 50,
    tol: float = 1e-12,
    logger: ExperimentLogger | None = None,
) -> MASolveTrace:
    """
    Solve A(1 + φ) = 1 + γ by Picard iteration.

    Stops once ‖φ_{m+1} - φ_m‖_{L²} < tol. Hölder norms are recorded for
    diagnosis only and never gate convergence.

    Raises:
        ParityError: if γ has odd-degree energy
        SolverDivergenceError: if the increment grows three steps in a row
    """
    band_limit = grid.max_band_limit if band_limit is None else band_limit
    gamma_coeffs = _as_gamma(grid, gamma, band_limit)
    gamma_field = synthesize(gamma_coeffs, grid)

    phi0 = laplace_solve(gamma_coeffs)
    trace = MASolveTrace(
        dim_n=grid.dim_n,
        band_limit=band_limit,
        alpha=alpha,
        gamma_l2=l2_norm(gamma_coeffs),
        gamma_sup=sup_norm(grid, gamma_coeffs),
        gamma_holder=holder_seminorm(grid, gamma_field, alpha),
        phi=phi0,
        phi_prime=phi0,
    )

    params = {"band_limit": band_limit, "alpha": alpha, "tol": tol, "gamma_l2": trace.gamma_l2}
    with logger.timed("ma_solve", params) if logger else nullcontext({}) as record:
        trace.converged = trace.gamma_l2 == 0.0
        phi = phi0
        streak = 0
        for step in range(1, max_iter + 1):
            if trace.converged:
                break
            remainder = analyze(grid, ma_remainder_P(grid, phi), band_limit).even_part()
            updated = laplace_solve(gamma_coeffs - remainder)
            increment = updated - phi
            trace.increments.append(l2_norm(increment))
            trace.c2_alpha.append(c2_alpha_estimate(increment, grid, alpha))
            phi = updated
            trace.phi = phi
            if logger:
                logger.logger.debug(f"ma_solve step {step}: increment {trace.increments[-1]:.3e}")

            trace.converged = trace.increments[-1] < tol
            if step > 1 and trace.increments[-1] > trace.increments[-2]:
                streak += 1
            else:
                streak = 0
            if streak >= DIVERGENCE_STREAK and not trace.converged:
                trace.final_residual = equation_residual(grid, phi, gamma_coeffs)
                record["iterations"] = trace.iterations
                raise SolverDivergenceError(trace)

        trace.final_residual = equation_residual(grid, trace.phi, gamma_coeffs)
        record.update(
            iterations=trace.iterations,
            converged=trace.converged,
            final_residual=trace.final_residual,
        )
    return trace


def contraction_rate(trace: MASolveTrace) -> float:
    """Empirical contraction factor: geometric mean ratio of the leading increments.

    Increments that have already dropped below RATE_FLOOR times the first one
    sit near rounding level and are left out, but the first three always count.
    """
    increments = trace.increments
    if len(increments) < 3:
        raise SphereRigidityError(
            f"contraction rate needs at least 3 iterations, trace has {len(increments)}"
        )
    count = len(increments)
    for i, value in enumerate(increments):
        if value <= RATE_FLOOR * increments[0]:
            count = i
            break
    count = max(3, count)
    first, last = increments[0], increments[count - 1]
    if first == 0.0:
        return 0.0
    return float((last / first) ** (1.0 / (count - 1)))


def phi_split_check(
    trace: MASolveTrace, gamma: HarmonicCoeffs, tolerance: float = 1e-12
) -> tuple[bool, float]:
    """Check Δ̃φ′ = γ degree-wise and return ‖φ″‖ / ‖γ‖."""
    gamma = gamma.with_band_limit(trace.band_limit)
    gap = laplace_apply(trace.phi_prime) - gamma
    exact = bool(np.max(np.abs(gap.values), initial=0.0) <= tolerance * max(1.0, l2_norm(gamma)))
    gamma_norm = l2_norm(gamma)
    ratio = 0.0 if gamma_norm == 0.0 else l2_norm(trace.phi_double_prime) / gamma_norm
    return exact, ratio
