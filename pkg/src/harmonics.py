"""Real spherical harmonics on S^2 and Fourier modes on S^1.

The basis is orthonormal for the probability measure σ, so Y_0 ≡ 1.

Index layout:
  n=3: (m, k) with -m ≤ k ≤ m sits at m² + m + k; k > 0 carries cos(kφ),
       k < 0 carries sin(|k|φ).
  n=2: (0, 0) at 0, (m, +m) = √2 cos(mφ) at 2m-1, (m, -m) = √2 sin(mφ) at 2m.
"""

import math
import weakref
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .entities import Parity
from .errors import AliasingError, SphereRigidityError, UnsupportedDimensionError
from .sphere_core import (
    SphericalGrid,
    build_grid,
    close_node_pairs,
    integrate,
    spherical_angles,
)

SUP_REFINEMENT = 3


def basis_size(dim_n: int, band_limit: int) -> int:
    if dim_n == 3:
        return (band_limit + 1) ** 2
    if dim_n == 2:
        return 2 * band_limit + 1
    raise UnsupportedDimensionError(dim_n)


def index_of(dim_n: int, m: int, k: int) -> int:
    if abs(k) > m:
        raise SphereRigidityError(f"order {k} out of range for degree {m}")
    if dim_n == 3:
        return m * m + m + k
    if dim_n == 2:
        if m == 0:
            return 0
        if abs(k) != m:
            raise SphereRigidityError(f"order must be ±{m} on the circle, got {k}")
        return 2 * m - 1 if k > 0 else 2 * m
    raise UnsupportedDimensionError(dim_n)


def degree_orders(dim_n: int, band_limit: int) -> tuple[np.ndarray, np.ndarray]:
    """Degree and order of every basis index."""
    if dim_n == 3:
        degrees = np.concatenate([np.full(2 * m + 1, m) for m in range(band_limit + 1)])
        orders = np.concatenate([np.arange(-m, m + 1) for m in range(band_limit + 1)])
        return degrees, orders
    if dim_n == 2:
        degrees = np.zeros(2 * band_limit + 1, dtype=int)
        orders = np.zeros(2 * band_limit + 1, dtype=int)
        for m in range(1, band_limit + 1):
            degrees[2 * m - 1] = degrees[2 * m] = m
            orders[2 * m - 1] = m
            orders[2 * m] = -m
        return degrees, orders
    raise UnsupportedDimensionError(dim_n)


@dataclass(frozen=True)
class HarmonicCoeffs:
    """Coefficient table of a field up to band limit L."""

    dim_n: int
    band_limit: int
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        expected = basis_size(self.dim_n, self.band_limit)
        if values.shape != (expected,):
            raise SphereRigidityError(
                f"expected {expected} coefficients for L={self.band_limit}, got {values.shape}"
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, dim_n: int, band_limit: int) -> "HarmonicCoeffs":
        return cls(dim_n, band_limit, np.zeros(basis_size(dim_n, band_limit)))

    @classmethod
    def single(
        cls, dim_n: int, band_limit: int, m: int, k: int = 0, value: float = 1.0
    ) -> "HarmonicCoeffs":
        if m > band_limit:
            raise SphereRigidityError(f"degree {m} exceeds band limit {band_limit}")
        values = np.zeros(basis_size(dim_n, band_limit))
        values[index_of(dim_n, m, k)] = value
        return cls(dim_n, band_limit, values)

    @classmethod
    def constant(cls, dim_n: int, band_limit: int, value: float) -> "HarmonicCoeffs":
        return cls.single(dim_n, band_limit, 0, 0, value)

    @property
    def degrees(self) -> np.ndarray:
        return degree_orders(self.dim_n, self.band_limit)[0]

    @property
    def orders(self) -> np.ndarray:
        return degree_orders(self.dim_n, self.band_limit)[1]

    def coeff(self, m: int, k: int = 0) -> float:
        if m > self.band_limit:
            return 0.0
        return float(self.values[index_of(self.dim_n, m, k)])

    @property
    def mean(self) -> float:
        return float(self.values[0])

    def degree_energies(self) -> np.ndarray:
        """Σ_k c_{m,k}² for m = 0..L"""
        return np.bincount(self.degrees, weights=self.values**2, minlength=self.band_limit + 1)

    def odd_energy(self) -> float:
        return float(self.degree_energies()[1::2].sum())

    @property
    def parity(self) -> Parity:
        odd = self.degrees % 2 == 1
        if not np.any(self.values[odd]):
            return Parity.EVEN
        if not np.any(self.values[~odd]):
            return Parity.ODD
        return Parity.MIXED

    def even_part(self) -> "HarmonicCoeffs":
        values = self.values.copy()
        values[self.degrees % 2 == 1] = 0.0
        return HarmonicCoeffs(self.dim_n, self.band_limit, values)

    def with_band_limit(self, band_limit: int) -> "HarmonicCoeffs":
        """Truncate or zero-pad; the index layout is nested across band limits"""
        size = basis_size(self.dim_n, band_limit)
        values = np.zeros(size)
        keep = min(size, self.values.size)
        values[:keep] = self.values[:keep]
        return HarmonicCoeffs(self.dim_n, band_limit, values)

    def _check_compatible(self, other: "HarmonicCoeffs") -> None:
        if (self.dim_n, self.band_limit) != (other.dim_n, other.band_limit):
            raise SphereRigidityError(
                f"incompatible coefficient tables: n={self.dim_n}, L={self.band_limit} vs "
                f"n={other.dim_n}, L={other.band_limit}"
            )

    def __add__(self, other: "HarmonicCoeffs") -> "HarmonicCoeffs":
        self._check_compatible(other)
        return HarmonicCoeffs(self.dim_n, self.band_limit, self.values + other.values)

    def __sub__(self, other: "HarmonicCoeffs") -> "HarmonicCoeffs":
        self._check_compatible(other)
        return HarmonicCoeffs(self.dim_n, self.band_limit, self.values - other.values)

    def __mul__(self, scalar: float) -> "HarmonicCoeffs":
        return HarmonicCoeffs(self.dim_n, self.band_limit, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "HarmonicCoeffs":
        return HarmonicCoeffs(self.dim_n, self.band_limit, -self.values)

    def plus_constant(self, value: float) -> "HarmonicCoeffs":
        values = self.values.copy()
        values[0] += value
        return HarmonicCoeffs(self.dim_n, self.band_limit, values)


# ---------------------------------------------------------------------------
# Basis evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BasisJet:
    """Basis values and angular derivatives at a set of points.

    Arrays have shape (P, nbasis). ``d_theta`` and friends are None for n=2,
    where only the longitude derivatives exist.
    """

    values: np.ndarray
    d_phi: np.ndarray
    d_phiphi: np.ndarray
    colatitude: np.ndarray
    d_theta: np.ndarray | None = None
    d_thetatheta: np.ndarray | None = None
    d_thetaphi: np.ndarray | None = None


def _legendre_tables(
    band_limit: int, theta: np.ndarray, with_derivatives: bool
) -> tuple[dict, dict, dict]:
    """Fully normalized associated Legendre functions P̄_{m,k}(cos θ) and θ-derivatives."""
    t = np.cos(theta)
    s = np.sin(theta)
    p: dict[tuple[int, int], np.ndarray] = {(0, 0): np.ones_like(theta)}
    for k in range(1, band_limit + 1):
        if k == 1:
            p[(1, 1)] = math.sqrt(3.0) * s
        else:
            p[(k, k)] = math.sqrt((2 * k + 1) / (2 * k)) * s * p[(k - 1, k - 1)]
    for k in range(band_limit):
        p[(k + 1, k)] = math.sqrt(2 * k + 3) * t * p[(k, k)]
    for k in range(band_limit + 1):
        for m in range(k + 2, band_limit + 1):
            a = math.sqrt((2 * m - 1) * (2 * m + 1) / ((m - k) * (m + k)))
            b = math.sqrt(
                (2 * m + 1) * (m + k - 1) * (m - k - 1) / ((m - k) * (m + k) * (2 * m - 3))
            )
            p[(m, k)] = a * t * p[(m - 1, k)] - b * p[(m - 2, k)]

    dp: dict[tuple[int, int], np.ndarray] = {}
    ddp: dict[tuple[int, int], np.ndarray] = {}
    if with_derivatives:
        cot = t / s
        for (m, k), values in p.items():
            below = p.get((m - 1, k))
            deriv = m * t * values
            if below is not None and m > k:
                deriv = deriv - math.sqrt((2 * m + 1) * (m - k) * (m + k) / (2 * m - 1)) * below
            dp[(m, k)] = deriv / s
            ddp[(m, k)] = -cot * dp[(m, k)] - (m * (m + 1) - k * k / (s * s)) * values
    return p, dp, ddp


def _sphere_basis(band_limit: int, points: np.ndarray, with_derivatives: bool) -> BasisJet:
    theta, phi = spherical_angles(points)
    p, dp, ddp = _legendre_tables(band_limit, theta, with_derivatives)
    npts = theta.size
    size = basis_size(3, band_limit)
    values = np.empty((npts, size))
    d_phi = np.empty((npts, size))
    d_phiphi = np.empty((npts, size))
    d_theta = np.empty((npts, size)) if with_derivatives else None
    d_tt = np.empty((npts, size)) if with_derivatives else None
    d_tp = np.empty((npts, size)) if with_derivatives else None

    for k in range(band_limit + 1):
        cos_k, sin_k = np.cos(k * phi), np.sin(k * phi)
        for m in range(k, band_limit + 1):
            branches = ((k, cos_k, -k * sin_k), (-k, sin_k, k * cos_k))
            for branch, (order, trig, dtrig) in enumerate(branches):
                # k == 0 has only the cosine column; -0 == 0 would overwrite it
                if k == 0 and branch == 1:
                    continue
                col = m * m + m + order
                values[:, col] = p[(m, k)] * trig
                d_phi[:, col] = p[(m, k)] * dtrig
                d_phiphi[:, col] = -(k * k) * values[:, col]
                if with_derivatives:
                    d_theta[:, col] = dp[(m, k)] * trig
                    d_tt[:, col] = ddp[(m, k)] * trig
                    d_tp[:, col] = dp[(m, k)] * dtrig
    return BasisJet(
        values=values,
        d_phi=d_phi,
        d_phiphi=d_phiphi,
        colatitude=theta,
        d_theta=d_theta,
        d_thetatheta=d_tt,
        d_thetaphi=d_tp,
    )


def _circle_basis(band_limit: int, points: np.ndarray) -> BasisJet:
    _, phi = spherical_angles(points)
    size = basis_size(2, band_limit)
    values = np.empty((phi.size, size))
    d_phi = np.empty_like(values)
    d_phiphi = np.empty_like(values)
    values[:, 0] = 1.0
    d_phi[:, 0] = 0.0
    d_phiphi[:, 0] = 0.0
    root2 = math.sqrt(2.0)
    for m in range(1, band_limit + 1):
        c, s = root2 * np.cos(m * phi), root2 * np.sin(m * phi)
        values[:, 2 * m - 1], values[:, 2 * m] = c, s
        d_phi[:, 2 * m - 1], d_phi[:, 2 * m] = -m * s, m * c
        d_phiphi[:, 2 * m - 1], d_phiphi[:, 2 * m] = -m * m * c, -m * m * s
    return BasisJet(
        values=values, d_phi=d_phi, d_phiphi=d_phiphi, colatitude=np.full(phi.size, np.pi / 2)
    )


def basis_at(
    dim_n: int, band_limit: int, points: np.ndarray, with_derivatives: bool = False
) -> BasisJet:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if dim_n == 3:
        return _sphere_basis(band_limit, points, with_derivatives)
    if dim_n == 2:
        return _circle_basis(band_limit, points)
    raise UnsupportedDimensionError(dim_n)


_GRID_BASIS: "weakref.WeakKeyDictionary[SphericalGrid, dict[tuple[int, bool], BasisJet]]" = (
    weakref.WeakKeyDictionary()
)


def grid_basis(grid: SphericalGrid, band_limit: int, with_derivatives: bool = False) -> BasisJet:
    """Basis jet at the grid nodes, cached per grid."""
    cache = _GRID_BASIS.setdefault(grid, {})
    jet = cache.get((band_limit, with_derivatives)) or cache.get((band_limit, True))
    if jet is None:
        jet = basis_at(grid.dim_n, band_limit, grid.nodes, with_derivatives)
        cache[(band_limit, with_derivatives)] = jet
    return jet


# ---------------------------------------------------------------------------
# Analysis / synthesis
# ---------------------------------------------------------------------------


def analyze(grid: SphericalGrid, samples: np.ndarray, band_limit: int) -> HarmonicCoeffs:
    """Coefficients <f, Y_{m,k}> by quadrature."""
    if band_limit > grid.max_band_limit:
        raise AliasingError(band_limit, grid.max_band_limit)
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (grid.size,):
        raise SphereRigidityError(
            f"sample count {samples.shape} does not match node count {grid.size}"
        )
    basis = grid_basis(grid, band_limit).values
    return HarmonicCoeffs(grid.dim_n, band_limit, basis.T @ (grid.weights * samples))


def synthesize(coeffs: HarmonicCoeffs, grid: SphericalGrid) -> np.ndarray:
    if coeffs.dim_n != grid.dim_n:
        raise SphereRigidityError(
            f"coefficients for n={coeffs.dim_n} cannot be synthesized on an n={grid.dim_n} grid"
        )
    return grid_basis(grid, coeffs.band_limit).values @ coeffs.values


def synthesize_at(coeffs: HarmonicCoeffs, points: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Pointwise evaluation of the expansion at arbitrary unit vectors."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty(points.shape[0])
    for start in range(0, points.shape[0], chunk):
        block = points[start : start + chunk]
        out[start : start + chunk] = (
            basis_at(coeffs.dim_n, coeffs.band_limit, block).values @ coeffs.values
        )
    return out


@dataclass(frozen=True)
class FieldJet:
    """A field and its angular derivatives at the grid nodes"""

    value: np.ndarray
    d_phi: np.ndarray
    d_phiphi: np.ndarray
    colatitude: np.ndarray
    d_theta: np.ndarray | None = None
    d_thetatheta: np.ndarray | None = None
    d_thetaphi: np.ndarray | None = None


def field_jet(coeffs: HarmonicCoeffs, grid: SphericalGrid) -> FieldJet:
    jet = grid_basis(grid, coeffs.band_limit, with_derivatives=grid.dim_n == 3)
    c = coeffs.values
    return FieldJet(
        value=jet.values @ c,
        d_phi=jet.d_phi @ c,
        d_phiphi=jet.d_phiphi @ c,
        colatitude=jet.colatitude,
        d_theta=None if jet.d_theta is None else jet.d_theta @ c,
        d_thetatheta=None if jet.d_thetatheta is None else jet.d_thetatheta @ c,
        d_thetaphi=None if jet.d_thetaphi is None else jet.d_thetaphi @ c,
    )


def project_band(coeffs: HarmonicCoeffs, m_lo: int, m_hi: int | None = None) -> HarmonicCoeffs:
    """Keep degrees m_lo ≤ m ≤ m_hi (no upper bound when m_hi is None)."""
    if m_lo < 0 or (m_hi is not None and m_hi < m_lo):
        raise SphereRigidityError(f"invalid band [{m_lo}, {m_hi}]")
    degrees = coeffs.degrees
    keep = degrees >= m_lo
    if m_hi is not None:
        keep &= degrees <= m_hi
    return HarmonicCoeffs(coeffs.dim_n, coeffs.band_limit, np.where(keep, coeffs.values, 0.0))


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------


def l2_norm(coeffs: HarmonicCoeffs) -> float:
    """L²(σ) norm via Parseval"""
    return float(np.linalg.norm(coeffs.values))


@lru_cache(maxsize=8)
def _refined_grid(dim_n: int, resolution: int) -> SphericalGrid:
    return build_grid(dim_n, resolution)


def sup_norm(grid: SphericalGrid, field: np.ndarray | HarmonicCoeffs) -> float:
    """max |f| over the nodes.

    Coefficient tables are also evaluated on a grid SUP_REFINEMENT times finer
    than ``grid``, so the maximum is not limited to the node positions.
    """
    if not isinstance(field, HarmonicCoeffs):
        return float(np.max(np.abs(field)))
    coarse = float(np.max(np.abs(synthesize(field, grid))))
    fine = _refined_grid(grid.dim_n, SUP_REFINEMENT * grid.resolution)
    return max(coarse, float(np.max(np.abs(synthesize_at(field, fine.nodes)))))


def holder_seminorm(
    grid: SphericalGrid, samples: np.ndarray, alpha: float, cutoff_spacings: float = 4.0
) -> float:
    """Discrete Hölder seminorm over node pairs closer than a few grid spacings.

    The supremum is estimated as max |f(x) - f(y)| / |x - y|^α over the pairs,
    with |x - y| the chordal distance.
    """
    if not 0.0 < alpha < 1.0:
        raise SphereRigidityError(f"Hölder exponent must lie in (0, 1), got {alpha}")
    samples = np.asarray(samples, dtype=float)
    pairs = close_node_pairs(grid, cutoff_spacings * grid.spacing)
    if pairs.size == 0:
        return 0.0
    i, j = pairs[:, 0], pairs[:, 1]
    dist = np.linalg.norm(grid.nodes[i] - grid.nodes[j], axis=1)
    valid = dist > 0
    ratios = np.abs(samples[i] - samples[j])[valid] / dist[valid] ** alpha
    return float(ratios.max()) if ratios.size else 0.0


def tangential_derivatives(
    coeffs: HarmonicCoeffs, grid: SphericalGrid
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """First and second covariant derivatives in the orthonormal (e_θ, e_φ) frame."""
    jet = field_jet(coeffs, grid)
    if grid.dim_n == 2:
        return [jet.d_phi], [jet.d_phiphi]
    s = np.sin(jet.colatitude)
    cot = np.cos(jet.colatitude) / s
    first = [jet.d_theta, jet.d_phi / s]
    second = [
        jet.d_thetatheta,
        (jet.d_thetaphi - cot * jet.d_phi) / s,
        jet.d_phiphi / (s * s) + cot * jet.d_theta,
    ]
    return first, second


def c2_alpha_estimate(coeffs: HarmonicCoeffs, grid: SphericalGrid, alpha: float = 0.5) -> float:
    """Discrete C^{2+α} norm: sup of the jet up to order two plus the α-seminorm of the Hessian."""
    first, second = tangential_derivatives(coeffs, grid)
    total = sup_norm(grid, synthesize(coeffs, grid))
    total += max(sup_norm(grid, d) for d in first)
    total += max(sup_norm(grid, d) for d in second)
    total += max(holder_seminorm(grid, d, alpha) for d in second)
    return float(total)


def parseval_gap(grid: SphericalGrid, samples: np.ndarray, coeffs: HarmonicCoeffs) -> float:
    """|∫f² dσ - Σc²| for a band-limited field"""
    return abs(integrate(grid, np.asarray(samples) ** 2) - float(coeffs.values @ coeffs.values))
