"""Diagonal and nonlinear operators on the sphere.

Diagonal operators (Funk transform ℛ, the Laplacian Δ̃ of the 1-homogeneous
extension and the contraction operators built from them) act degree-wise on
:class:`HarmonicCoeffs`. The Monge-Ampère operator is evaluated at the grid
nodes from the analytic derivatives of a band-limited expansion.
"""

import math
from collections.abc import Callable
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ParityError, SphereRigidityError
from .harmonics import (
    FieldJet,
    HarmonicCoeffs,
    analyze,
    field_jet,
    synthesize,
    synthesize_at,
)
from .sphere_core import (
    MIN_CIRCLE_SAMPLES,
    SphericalGrid,
    cap_nodes,
    great_circle_points,
    integrate,
)

ODD_ENERGY_TOLERANCE = 1e-10
MAXIMAL_LADDER_STEPS = 32
NODE_LOCAL_RADIUS = 1e-9


@dataclass(frozen=True)
class OperatorSpectrum:
    """Multiplier table m -> value for a rotation-invariant operator"""

    dim_n: int
    name: str
    multipliers: np.ndarray

    @property
    def band_limit(self) -> int:
        return int(self.multipliers.size - 1)

    def multiplier(self, m: int) -> float:
        return float(self.multipliers[m])

    def apply(self, coeffs: HarmonicCoeffs) -> HarmonicCoeffs:
        if coeffs.band_limit > self.band_limit:
            raise SphereRigidityError(
                f"{self.name} spectrum covers degrees up to {self.band_limit}, "
                f"got L={coeffs.band_limit}"
            )
        return HarmonicCoeffs(
            coeffs.dim_n, coeffs.band_limit, coeffs.values * self.multipliers[coeffs.degrees]
        )

    def max_abs(self, m_lo: int = 0, even_only: bool = True) -> tuple[int, float]:
        """Degree and value of the largest |multiplier| at degrees ≥ m_lo."""
        degrees = np.arange(m_lo, self.band_limit + 1)
        if even_only:
            degrees = degrees[degrees % 2 == 0]
        values = np.abs(self.multipliers[degrees])
        best = int(np.argmax(values))
        return int(degrees[best]), float(values[best])

    def as_dict(self) -> dict[int, float]:
        return {m: float(v) for m, v in enumerate(self.multipliers)}


# ---------------------------------------------------------------------------
# Multipliers
# ---------------------------------------------------------------------------


def funk_multiplier_exact(m: int, n: int) -> Fraction:
    """(-1)^{m/2} · 1·3···(m-1) / ((n-1)(n+1)···(n+m-3)) as an exact rational"""
    if m < 0 or m % 2:
        raise ParityError("Funk transform restricted to even functions", float(m % 2))
    if n < 2:
        raise SphereRigidityError(f"ambient dimension must be at least 2, got {n}")
    value = Fraction(1)
    for j in range(m // 2):
        value *= Fraction(2 * j + 1, n - 1 + 2 * j)
    return -value if (m // 2) % 2 else value


def funk_multiplier(m: int, n: int) -> float:
    return float(funk_multiplier_exact(m, n))


def laplace_multiplier(m: int, n: int) -> int:
    """(1 - m)(m + n - 1): eigenvalue of Δ̃ on degree-m harmonics"""
    return (1 - m) * (m + n - 1)


def funk_spectrum(n: int, band_limit: int) -> OperatorSpectrum:
    values = np.array(
        [funk_multiplier(m, n) if m % 2 == 0 else 0.0 for m in range(band_limit + 1)]
    )
    return OperatorSpectrum(n, "funk", values)


def laplace_spectrum(n: int, band_limit: int) -> OperatorSpectrum:
    values = np.array([float(laplace_multiplier(m, n)) for m in range(band_limit + 1)])
    return OperatorSpectrum(n, "laplace", values)


# ---------------------------------------------------------------------------
# Funk transform
# ---------------------------------------------------------------------------


def _require_even(coeffs: HarmonicCoeffs, message: str) -> HarmonicCoeffs:
    odd = coeffs.odd_energy()
    if odd > ODD_ENERGY_TOLERANCE:
        raise ParityError(message, odd)
    return coeffs.even_part()


def funk_spectral(coeffs: HarmonicCoeffs) -> HarmonicCoeffs:
    even = _require_even(coeffs, "Funk transform restricted to even functions")
    return funk_spectrum(coeffs.dim_n, coeffs.band_limit).apply(even)


def default_circle_count(band_limit: int) -> int:
    return max(2 * band_limit + 2, MIN_CIRCLE_SAMPLES)


def funk_average(
    evaluator: Callable[[np.ndarray], np.ndarray],
    poles: np.ndarray,
    circle_count: int = 128,
    chunk: int = 256,
) -> np.ndarray:
    """Great-circle averages of an exact evaluator f(points) -> values."""
    poles = np.atleast_2d(np.asarray(poles, dtype=float))
    out = np.empty(poles.shape[0])
    for start in range(0, poles.shape[0], chunk):
        block = great_circle_points(poles[start : start + chunk], circle_count)
        flat = block.reshape(-1, poles.shape[1])
        out[start : start + chunk] = evaluator(flat).reshape(block.shape[:2]).mean(axis=1)
    return out


def funk_quadrature(
    grid: SphericalGrid,
    samples: np.ndarray,
    circle_count: int | None = None,
    band_limit: int | None = None,
) -> np.ndarray:
    """ℛf at every node, averaging the synthesized expansion of f over great circles."""
    band_limit = grid.max_band_limit if band_limit is None else band_limit
    coeffs = analyze(grid, samples, band_limit)
    count = circle_count or default_circle_count(band_limit)
    return funk_average(lambda pts: synthesize_at(coeffs, pts), grid.nodes, count)


# ---------------------------------------------------------------------------
# Laplacian of the 1-homogeneous extension
# ---------------------------------------------------------------------------


def laplace_apply(phi: HarmonicCoeffs) -> HarmonicCoeffs:
    return laplace_spectrum(phi.dim_n, phi.band_limit).apply(phi)


def laplace_solve(gamma: HarmonicCoeffs) -> HarmonicCoeffs:
    """Solve Δ̃F = γ degree-wise for even γ."""
    even = _require_even(gamma, "Laplace inversion requires an even right-hand side")
    spectrum = laplace_spectrum(gamma.dim_n, gamma.band_limit)
    values = np.zeros_like(even.values)
    degrees = even.degrees
    solvable = degrees % 2 == 0
    values[solvable] = even.values[solvable] / spectrum.multipliers[degrees[solvable]]
    return HarmonicCoeffs(gamma.dim_n, gamma.band_limit, values)


# ---------------------------------------------------------------------------
# Monge-Ampère operator
# ---------------------------------------------------------------------------


def _angle_gradients(nodes: np.ndarray) -> tuple[np.ndarray, ...]:
    """∇θ, ∇φ, ∇²θ, ∇²φ of the ambient angle functions at unit vectors of R^3."""
    x, y, z = nodes[:, 0], nodes[:, 1], nodes[:, 2]
    s2 = x * x + y * y
    s = np.sqrt(s2)
    s4 = s2 * s2
    grad_theta = np.stack([x * z / s, y * z / s, -s], axis=1)
    grad_phi = np.stack([-y / s2, x / s2, np.zeros_like(x)], axis=1)

    hess_phi = np.zeros((nodes.shape[0], 3, 3))
    hess_phi[:, 0, 0] = 2 * x * y / s4
    hess_phi[:, 1, 1] = -2 * x * y / s4
    hess_phi[:, 0, 1] = hess_phi[:, 1, 0] = (y * y - x * x) / s4

    hess_theta = np.zeros((nodes.shape[0], 3, 3))
    hess_theta[:, 0, 0] = z / s * (1 - 2 * x * x - x * x / s2)
    hess_theta[:, 1, 1] = z / s * (1 - 2 * y * y - y * y / s2)
    hess_theta[:, 2, 2] = 2 * s * z
    hess_theta[:, 0, 1] = hess_theta[:, 1, 0] = -x * y * z / s * (2 + 1 / s2)
    hess_theta[:, 0, 2] = hess_theta[:, 2, 0] = x / s * (1 - 2 * z * z)
    hess_theta[:, 1, 2] = hess_theta[:, 2, 1] = y / s * (1 - 2 * z * z)
    return grad_theta, grad_phi, hess_theta, hess_phi


def ambient_hessian(grid: SphericalGrid, jet: FieldJet) -> np.ndarray:
    """Hessian of H(x) = |x| h(x/|x|) at the grid nodes, shape (N, n, n)."""
    u = grid.nodes
    outer = np.einsum
    if grid.dim_n == 2:
        grad_phi = np.stack([-u[:, 1], u[:, 0]], axis=1)
        hess_phi = np.zeros((u.shape[0], 2, 2))
        hess_phi[:, 0, 0] = 2 * u[:, 0] * u[:, 1]
        hess_phi[:, 1, 1] = -2 * u[:, 0] * u[:, 1]
        hess_phi[:, 0, 1] = hess_phi[:, 1, 0] = u[:, 1] ** 2 - u[:, 0] ** 2
        grad_g = jet.d_phi[:, None] * grad_phi
        hess_g = (
            jet.d_phiphi[:, None, None] * outer("pi,pj->pij", grad_phi, grad_phi)
            + jet.d_phi[:, None, None] * hess_phi
        )
    else:
        grad_theta, grad_phi, hess_theta, hess_phi = _angle_gradients(u)
        grad_g = jet.d_theta[:, None] * grad_theta + jet.d_phi[:, None] * grad_phi
        tp = outer("pi,pj->pij", grad_theta, grad_phi)
        hess_g = (
            jet.d_thetatheta[:, None, None] * outer("pi,pj->pij", grad_theta, grad_theta)
            + jet.d_thetaphi[:, None, None] * (tp + tp.transpose(0, 2, 1))
            + jet.d_phiphi[:, None, None] * outer("pi,pj->pij", grad_phi, grad_phi)
            + jet.d_theta[:, None, None] * hess_theta
            + jet.d_phi[:, None, None] * hess_phi
        )
    eye = np.eye(grid.dim_n)[None, :, :]
    uu = outer("pi,pj->pij", u, u)
    cross = outer("pi,pj->pij", grad_g, u)
    return cross + cross.transpose(0, 2, 1) + jet.value[:, None, None] * (eye - uu) + hess_g


def _principal_minor_sum(hessian: np.ndarray) -> np.ndarray:
    n = hessian.shape[-1]
    if n == 2:
        return hessian[:, 0, 0] + hessian[:, 1, 1]
    total = np.zeros(hessian.shape[0])
    for i in range(n):
        minor = np.delete(np.delete(hessian, i, axis=1), i, axis=2)
        total += np.linalg.det(minor)
    return total


def _as_coeffs(grid: SphericalGrid, h: HarmonicCoeffs | np.ndarray) -> HarmonicCoeffs:
    if isinstance(h, HarmonicCoeffs):
        return h
    return analyze(grid, np.asarray(h, dtype=float), grid.max_band_limit)


def monge_ampere(grid: SphericalGrid, h: HarmonicCoeffs | np.ndarray) -> np.ndarray:
    """A h: sum of the principal (n-1)-minors of the ambient Hessian of |x| h(x/|x|)."""
    coeffs = _as_coeffs(grid, h)
    jet = field_jet(coeffs, grid)
    if np.min(jet.value) <= 0:
        raise SphereRigidityError(
            f"Monge-Ampère operator needs a positive function, min {np.min(jet.value):.3e}"
        )
    return _principal_minor_sum(ambient_hessian(grid, jet))


def tangential_hessian(jet: FieldJet) -> tuple[np.ndarray, ...]:
    """Entries of ∇²_S h + h·Id in the orthonormal (e_θ, e_φ) frame.

    Returns (H11,) on S^1 and (H11, H12, H22) on S^2.
    """
    if jet.d_theta is None:
        return (jet.d_phiphi + jet.value,)
    s = np.sin(jet.colatitude)
    cot = np.cos(jet.colatitude) / s
    h11 = jet.d_thetatheta + jet.value
    h12 = (jet.d_thetaphi - cot * jet.d_phi) / s
    h22 = jet.d_phiphi / (s * s) + cot * jet.d_theta + jet.value
    return h11, h12, h22


def least_eigenvalue(entries: tuple[np.ndarray, ...]) -> np.ndarray:
    if len(entries) == 1:
        return entries[0]
    h11, h12, h22 = entries
    return 0.5 * (h11 + h22) - np.sqrt(0.25 * (h11 - h22) ** 2 + h12 * h12)


def monge_ampere_tangential(grid: SphericalGrid, h: HarmonicCoeffs | np.ndarray) -> np.ndarray:
    """det(∇²_S h + h·Id), the curvature function written intrinsically."""
    entries = tangential_hessian(field_jet(_as_coeffs(grid, h), grid))
    if len(entries) == 1:
        return entries[0]
    h11, h12, h22 = entries
    return h11 * h22 - h12 * h12


def ma_remainder_P(grid: SphericalGrid, phi: HarmonicCoeffs) -> np.ndarray:
    """P(φ) = A(1 + φ) - 1 - Δ̃φ at the grid nodes."""
    one_plus = phi.plus_constant(1.0)
    return monge_ampere(grid, one_plus) - 1.0 - synthesize(laplace_apply(phi), grid)


# ---------------------------------------------------------------------------
# Spherical maximal function
# ---------------------------------------------------------------------------


def radius_ladder(grid: SphericalGrid, extra_radii: list[float] | None = None) -> np.ndarray:
    """Node-local cap, geometric ladder from the grid spacing to π, plus extras."""
    ladder = np.geomspace(grid.spacing, np.pi, MAXIMAL_LADDER_STEPS)
    # the node-local radius makes Mf(e) >= |f(e)|
    radii = np.concatenate([[NODE_LOCAL_RADIUS], ladder, np.asarray(extra_radii or [], float)])
    return np.unique(np.clip(radii, NODE_LOCAL_RADIUS, np.pi))


def cap_average(
    grid: SphericalGrid, samples: np.ndarray, center: np.ndarray, radius_angle: float
) -> float:
    """σ-average of |f| over the closed cap S_ϑ(center) at grid resolution."""
    idx = cap_nodes(grid, center, radius_angle)
    if idx.size == 0:
        return 0.0
    w = grid.weights[idx]
    return float(w @ np.abs(np.asarray(samples)[idx]) / w.sum())


def maximal_function(
    grid: SphericalGrid,
    samples: np.ndarray,
    extra_radii: list[float] | None = None,
    chunk: int = 512,
) -> np.ndarray:
    """Mf(e): max over the radius ladder of the cap averages of |f| centred at e."""
    absf = np.abs(np.asarray(samples, dtype=float))
    weighted = grid.weights * absf
    # u in S_r(e) iff <u, e> >= cos r; the slack keeps boundary nodes
    thresholds = np.cos(radius_ladder(grid, extra_radii)) - 1e-12
    out = np.zeros(grid.size)
    for start in range(0, grid.size, chunk):
        gram = grid.nodes[start : start + chunk] @ grid.nodes.T
        best = np.zeros(gram.shape[0])
        for threshold in thresholds:
            mask = gram >= threshold
            # empty caps average to zero
            mass = mask @ grid.weights
            avg = np.divide(mask @ weighted, mass, out=np.zeros_like(mass), where=mass > 0)
            np.maximum(best, avg, out=best)
        out[start : start + chunk] = best
    return out


def maximal_l2_ratio(grid: SphericalGrid, samples: np.ndarray) -> float:
    """‖Mf‖ / ‖f‖ in L²(σ): an empirical lower bound for the operator norm of M."""
    norm = math.sqrt(integrate(grid, np.asarray(samples) ** 2))
    if norm == 0:
        return 0.0
    mf = maximal_function(grid, samples)
    return math.sqrt(integrate(grid, mf**2)) / norm
