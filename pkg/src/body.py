"""Origin-symmetric convex bodies sampled on a spherical grid.

A body is stored through its radial function ρ. Bodies with a closed form
(balls, ellipsoids, linear images, Radon curves) also carry exact radial and
support evaluators; everything else is evaluated by synthesis from the
band-limited coefficients of ρ.
"""

import math
from collections.abc import Callable
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial.distance import pdist

from .entities import LipschitzResult
from .errors import ConvexityError, SphereRigidityError
from .harmonics import (
    FieldJet,
    HarmonicCoeffs,
    analyze,
    field_jet,
    l2_norm,
    project_band,
    synthesize,
    synthesize_at,
)
from .operators import (
    default_circle_count,
    funk_average,
    least_eigenvalue,
    maximal_function,
    monge_ampere,
    tangential_hessian,
)
from .sphere_core import (
    SphericalGrid,
    ball_volume,
    integrate,
    normalize,
    sphere_area,
    tangent_frame,
)

Evaluator = Callable[[np.ndarray], np.ndarray]

CONVEXITY_TOLERANCE = -1e-8
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
REFINE_SWEEPS = 3
REFINE_STEPS = 20
REFINE_HALF_WIDTH = 1.5  # in grid spacings
EXACT_CIRCLE_COUNT = 128


@dataclass(frozen=True, eq=False)
class ConvexBody:
    grid: SphericalGrid
    band_limit: int
    radial: np.ndarray
    radial_coeffs: HarmonicCoeffs
    radial_fn: Evaluator | None = field(default=None, repr=False)
    support_fn: Evaluator | None = field(default=None, repr=False)
    label: str = ""

    def __post_init__(self):
        if self.radial_coeffs.dim_n != self.grid.dim_n:
            raise SphereRigidityError("radial coefficients and grid disagree on the dimension")
        if np.min(self.radial) <= 0:
            raise SphereRigidityError(
                f"radial function must be positive, min {np.min(self.radial):.3e}"
            )

    @property
    def dim_n(self) -> int:
        return self.grid.dim_n

    @classmethod
    def from_coeffs(cls, grid: SphericalGrid, coeffs: HarmonicCoeffs, label: str = "") -> "ConvexBody":
        even = coeffs.even_part()
        radial = grid.symmetrize(synthesize(even, grid))
        return cls(grid, coeffs.band_limit, radial, even, label=label)

    @classmethod
    def from_radial_fn(
        cls,
        grid: SphericalGrid,
        band_limit: int,
        radial_fn: Evaluator,
        support_fn: Evaluator | None = None,
        label: str = "",
    ) -> "ConvexBody":
        radial = grid.symmetrize(radial_fn(grid.nodes))
        coeffs = analyze(grid, radial, band_limit).even_part()
        return cls(grid, band_limit, radial, coeffs, radial_fn, support_fn, label)

    def radial_at(self, points: np.ndarray) -> np.ndarray:
        points = normalize(np.atleast_2d(points))
        if self.radial_fn is not None:
            return np.asarray(self.radial_fn(points), dtype=float)
        return synthesize_at(self.radial_coeffs, points)

    def support_at(self, points: np.ndarray) -> np.ndarray:
        points = normalize(np.atleast_2d(points))
        if self.support_fn is not None:
            return np.asarray(self.support_fn(points), dtype=float)
        return support_from_radial(self, points)

    @cached_property
    def support(self) -> np.ndarray:
        """h at the grid nodes"""
        if self.support_fn is not None:
            return self.grid.symmetrize(self.support_fn(self.grid.nodes))
        return self.grid.symmetrize(support_from_radial(self))

    @cached_property
    def support_coeffs(self) -> HarmonicCoeffs:
        return analyze(self.grid, self.support, self.band_limit).even_part()

    def scaled(self, factor: float) -> "ConvexBody":
        radial_fn = None if self.radial_fn is None else _scale(self.radial_fn, factor)
        support_fn = None if self.support_fn is None else _scale(self.support_fn, factor)
        return ConvexBody(
            self.grid,
            self.band_limit,
            self.radial * factor,
            self.radial_coeffs * factor,
            radial_fn,
            support_fn,
            self.label,
        )


def _scale(fn: Evaluator, factor: float) -> Evaluator:
    return lambda points: factor * fn(points)


# ---------------------------------------------------------------------------
# Closed-form bodies
# ---------------------------------------------------------------------------


def ball(grid: SphericalGrid, band_limit: int, radius: float = 1.0) -> ConvexBody:
    coeffs = HarmonicCoeffs.constant(grid.dim_n, band_limit, radius)
    constant = _scale(lambda p: np.ones(p.shape[0]), radius)
    return ConvexBody(
        grid,
        band_limit,
        np.full(grid.size, float(radius)),
        coeffs,
        constant,
        constant,
        label=f"ball(r={radius:g})",
    )


def ellipsoid(
    grid: SphericalGrid,
    band_limit: int,
    axes: list[float] | np.ndarray | None = None,
    matrix: np.ndarray | None = None,
) -> ConvexBody:
    """The body M·B with ρ(u) = 1/|M⁻¹u| and h(u) = |Mᵀu|."""
    if matrix is None:
        if axes is None:
            raise SphereRigidityError("ellipsoid needs either axes or a matrix")
        matrix = np.diag(np.asarray(axes, dtype=float))
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (grid.dim_n, grid.dim_n):
        raise SphereRigidityError(f"ellipsoid matrix must be {grid.dim_n}x{grid.dim_n}")
    inverse = np.linalg.inv(matrix)

    def radial_fn(points: np.ndarray) -> np.ndarray:
        return 1.0 / np.linalg.norm(points @ inverse.T, axis=1)

    def support_fn(points: np.ndarray) -> np.ndarray:
        return np.linalg.norm(points @ matrix, axis=1)

    return ConvexBody.from_radial_fn(grid, band_limit, radial_fn, support_fn, label="ellipsoid")


def ellipsoid_curvature(matrix: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Curvature function (det M)² / h^{n+1} of the ellipsoid M·B"""
    matrix = np.asarray(matrix, dtype=float)
    h = np.linalg.norm(np.atleast_2d(points) @ matrix, axis=1)
    return np.linalg.det(matrix) ** 2 / h ** (matrix.shape[0] + 1)


def apply_linear(body: ConvexBody, transform: np.ndarray, band_limit: int | None = None) -> ConvexBody:
    """Exact image T·K resampled on the body's grid.

    ρ_{TK}(u) = ρ_K(dir(T⁻¹u)) / |T⁻¹u| and h_{TK}(u) = |Tᵀu| h_K(dir(Tᵀu)).
    """
    transform = np.asarray(transform, dtype=float)
    inverse = np.linalg.inv(transform)

    def radial_fn(points: np.ndarray) -> np.ndarray:
        pulled = points @ inverse.T
        norms = np.linalg.norm(pulled, axis=1)
        return body.radial_at(pulled / norms[:, None]) / norms

    support_fn = None
    if body.support_fn is not None:

        def support_fn(points: np.ndarray) -> np.ndarray:
            pushed = points @ transform
            norms = np.linalg.norm(pushed, axis=1)
            return norms * body.support_at(pushed / norms[:, None])

    return ConvexBody.from_radial_fn(
        body.grid,
        band_limit or body.band_limit,
        radial_fn,
        support_fn,
        label=f"linear({body.label})",
    )


# ---------------------------------------------------------------------------
# Support <-> radial
# ---------------------------------------------------------------------------


def _golden_refine(
    objective: Callable[[np.ndarray], np.ndarray],
    origin: np.ndarray,
    half_width: float,
    maximize: bool,
) -> np.ndarray:
    """Coordinate-wise golden-section search around each origin direction.

    Directions move as normalize(origin + Σ s_a e_a) in the tangent frame of
    the origin; returns the objective at the refined directions.
    """
    sign = 1.0 if maximize else -1.0
    frame = tangent_frame(origin)
    offsets = np.zeros((origin.shape[0], frame.shape[1]))

    def point(off: np.ndarray) -> np.ndarray:
        return normalize(origin + np.einsum("pa,pan->pn", off, frame))

    for _ in range(REFINE_SWEEPS):
        for axis in range(frame.shape[1]):

            def along(s: np.ndarray, axis: int = axis) -> np.ndarray:
                trial = offsets.copy()
                trial[:, axis] = s
                return sign * objective(point(trial))

            # bracket half_width either side of the current offset
            a = offsets[:, axis] - half_width
            b = offsets[:, axis] + half_width
            c = b - GOLDEN * (b - a)
            d = a + GOLDEN * (b - a)
            fc, fd = along(c), along(d)
            for _ in range(REFINE_STEPS):
                # keep the half of [a, b] holding the larger sample
                left = fc > fd
                b = np.where(left, d, b)
                a = np.where(left, a, c)
                fresh = np.where(left, b - GOLDEN * (b - a), a + GOLDEN * (b - a))
                fp = along(fresh)
                c, d, fc, fd = (
                    np.where(left, fresh, d),
                    np.where(left, c, fresh),
                    np.where(left, fp, fd),
                    np.where(left, fc, fp),
                )
            offsets[:, axis] = np.where(fc > fd, c, d)
    return objective(point(offsets))


def support_from_radial(body: ConvexBody, points: np.ndarray | None = None, chunk: int = 512) -> np.ndarray:
    """h(u) = max_v ρ(v)<u, v>: grid argmax refined by golden-section search."""
    grid = body.grid
    targets = grid.nodes if points is None else normalize(np.atleast_2d(points))
    best_value = np.empty(targets.shape[0])
    best_node = np.empty(targets.shape[0], dtype=int)
    for start in range(0, targets.shape[0], chunk):
        scores = (targets[start : start + chunk] @ grid.nodes.T) * body.radial[None, :]
        best_node[start : start + chunk] = np.argmax(scores, axis=1)
        best_value[start : start + chunk] = np.max(scores, axis=1)

    # <u, x> at the boundary point x = ρ(v)v
    def objective(directions: np.ndarray) -> np.ndarray:
        return body.radial_at(directions) * np.einsum("pn,pn->p", directions, targets)

    refined = _golden_refine(
        objective, grid.nodes[best_node], REFINE_HALF_WIDTH * grid.spacing, maximize=True
    )
    # the search only ever improves on the grid argmax
    return np.maximum(refined, best_value)


def radial_from_support(
    grid: SphericalGrid,
    h_field: np.ndarray,
    band_limit: int | None = None,
    support_fn: Evaluator | None = None,
    points: np.ndarray | None = None,
    chunk: int = 512,
) -> np.ndarray:
    """ρ(e) = inf over <e, e'> > 0 of h(e') / <e, e'>, refined like the support."""
    band_limit = grid.max_band_limit if band_limit is None else band_limit
    h_field = np.asarray(h_field, dtype=float)
    coeffs = analyze(grid, h_field, band_limit)
    margin_field = least_eigenvalue(tangential_hessian(field_jet(coeffs, grid)))
    worst = int(np.argmin(margin_field))
    if margin_field[worst] < CONVEXITY_TOLERANCE:
        raise ConvexityError(
            "support function fails the convexity certificate",
            location=grid.nodes[worst].tolist(),
            margin=float(margin_field[worst]),
        )
    evaluate = support_fn or (lambda p: synthesize_at(coeffs, p))

    targets = grid.nodes if points is None else normalize(np.atleast_2d(points))
    best_value = np.empty(targets.shape[0])
    best_node = np.empty(targets.shape[0], dtype=int)
    for start in range(0, targets.shape[0], chunk):
        cosines = targets[start : start + chunk] @ grid.nodes.T
        ratios = np.full_like(cosines, np.inf)
        positive = cosines > 0
        ratios[positive] = (h_field[None, :] / np.where(positive, cosines, 1.0))[positive]
        best_node[start : start + chunk] = np.argmin(ratios, axis=1)
        best_value[start : start + chunk] = np.min(ratios, axis=1)

    def objective(directions: np.ndarray) -> np.ndarray:
        cosines = np.einsum("pn,pn->p", directions, targets)
        safe = np.where(cosines > 0, cosines, 1.0)
        return np.where(cosines > 0, evaluate(directions) / safe, np.inf)

    refined = _golden_refine(
        objective, grid.nodes[best_node], REFINE_HALF_WIDTH * grid.spacing, maximize=False
    )
    return np.minimum(refined, best_value)


# ---------------------------------------------------------------------------
# Convexity
# ---------------------------------------------------------------------------


def convexity_margin(body: ConvexBody) -> float:
    """Least eigenvalue of ∇²_S h + h·Id over the nodes."""
    return float(np.min(least_eigenvalue(tangential_hessian(field_jet(body.support_coeffs, body.grid)))))


def gauge_jet(coeffs: HarmonicCoeffs, grid: SphericalGrid) -> FieldJet:
    """Jet of the gauge 1/ρ computed from the analytic jet of ρ."""
    rho = field_jet(coeffs, grid)
    inv = 1.0 / rho.value
    inv2, inv3 = inv * inv, inv * inv * inv

    def second(d_ab: np.ndarray | None, d_a: np.ndarray | None, d_b: np.ndarray | None):
        if d_ab is None or d_a is None or d_b is None:
            return None
        return -d_ab * inv2 + 2.0 * d_a * d_b * inv3

    return FieldJet(
        value=inv,
        d_phi=-rho.d_phi * inv2,
        d_phiphi=second(rho.d_phiphi, rho.d_phi, rho.d_phi),
        colatitude=rho.colatitude,
        d_theta=None if rho.d_theta is None else -rho.d_theta * inv2,
        d_thetatheta=second(rho.d_thetatheta, rho.d_theta, rho.d_theta),
        d_thetaphi=second(rho.d_thetaphi, rho.d_theta, rho.d_phi),
    )


def gauge_margin(grid: SphericalGrid, radial_coeffs: HarmonicCoeffs) -> float:
    """Least eigenvalue of ∇²_S g + g·Id for the gauge g = 1/ρ (convexity read from ρ)."""
    return float(np.min(least_eigenvalue(tangential_hessian(gauge_jet(radial_coeffs, grid)))))


def check_convexity(body: ConvexBody, tolerance: float = CONVEXITY_TOLERANCE) -> float:
    margins = least_eigenvalue(tangential_hessian(field_jet(body.support_coeffs, body.grid)))
    worst = int(np.argmin(margins))
    if margins[worst] < tolerance:
        raise ConvexityError(
            "body fails the convexity certificate",
            location=body.grid.nodes[worst].tolist(),
            margin=float(margins[worst]),
        )
    return float(margins[worst])


def perturbed_ball(
    grid: SphericalGrid, m: int, k: int, t: float, band_limit: int | None = None
) -> ConvexBody:
    """ρ = 1 + t·Y_{m,k}, validated by the gauge convexity certificate."""
    if m % 2:
        raise SphereRigidityError(f"origin-symmetric bodies need an even degree, got m={m}")
    band_limit = max(m, band_limit or grid.max_band_limit)
    base = HarmonicCoeffs.constant(grid.dim_n, band_limit, 1.0)
    direction = HarmonicCoeffs.single(grid.dim_n, band_limit, m, k)

    def admissible(scale: float) -> bool:
        coeffs = base + direction * scale
        if np.min(synthesize(coeffs, grid)) <= 0:
            return False
        return gauge_margin(grid, coeffs) >= CONVEXITY_TOLERANCE

    if not admissible(t):
        lo, hi = 0.0, abs(t)
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            if admissible(math.copysign(mid, t)):
                lo = mid
            else:
                hi = mid
        raise ConvexityError(
            f"perturbation of degree {m} is not convex at t={t}",
            max_admissible_t=math.copysign(lo, t),
        )
    return ConvexBody.from_coeffs(grid, base + direction * t, label=f"perturbed(m={m},k={k},t={t:g})")


def random_near_ball(
    grid: SphericalGrid,
    band_limit: int,
    rng: np.random.Generator,
    delta: float,
    max_degree: int = 4,
) -> ConvexBody:
    """Convex body with max |ρ - 1| = δ built from random even harmonics of degree 2..max_degree."""
    coeffs = HarmonicCoeffs.zeros(grid.dim_n, band_limit)
    degrees = coeffs.degrees
    mask = (degrees >= 2) & (degrees <= max_degree) & (degrees % 2 == 0)
    values = np.where(mask, rng.standard_normal(coeffs.values.size), 0.0)
    perturbation = HarmonicCoeffs(grid.dim_n, band_limit, values)
    scale = delta / np.max(np.abs(synthesize(perturbation, grid)))
    radial = (perturbation * scale).plus_constant(1.0)
    margin = gauge_margin(grid, radial)
    if margin < CONVEXITY_TOLERANCE:
        raise ConvexityError("random near-ball body is not convex", margin=margin)
    return ConvexBody.from_coeffs(grid, radial, label=f"near_ball(delta={delta:g})")


def random_convex_body_2d(
    grid: SphericalGrid,
    rng: np.random.Generator,
    amplitude: float = 0.3,
    max_degree: int = 6,
    band_limit: int | None = None,
) -> ConvexBody:
    """Planar symmetric body with a random trigonometric support function.

    h(φ) = 1 + s·Σ_{even m} (a_m cos mφ + b_m sin mφ)/m², with s chosen so
    that sup |h - 1| ≤ amplitude and h'' + h stays positive.
    """
    if grid.dim_n != 2:
        raise SphereRigidityError("random_convex_body_2d needs a circle grid")
    degrees = np.arange(2, max_degree + 1, 2)
    a = rng.standard_normal(degrees.size) / degrees**2
    b = rng.standard_normal(degrees.size) / degrees**2
    dense = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)
    wave = np.cos(np.outer(dense, degrees)) @ a + np.sin(np.outer(dense, degrees)) @ b
    curvature = (np.cos(np.outer(dense, degrees)) * (1 - degrees**2)) @ a + (
        np.sin(np.outer(dense, degrees)) * (1 - degrees**2)
    ) @ b
    scale = amplitude / np.max(np.abs(wave))
    if np.min(curvature) < 0:
        scale = min(scale, 0.9 / -np.min(curvature))

    def support_fn(points: np.ndarray) -> np.ndarray:
        phi = np.arctan2(points[:, 1], points[:, 0])
        return 1.0 + scale * (np.cos(np.outer(phi, degrees)) @ a + np.sin(np.outer(phi, degrees)) @ b)

    band_limit = band_limit or grid.max_band_limit
    h_nodes = support_fn(grid.nodes)
    radial = radial_from_support(grid, h_nodes, min(band_limit, grid.max_band_limit), support_fn)
    coeffs = analyze(grid, grid.symmetrize(radial), band_limit).even_part()
    return ConvexBody(
        grid,
        band_limit,
        grid.symmetrize(radial),
        coeffs,
        support_fn=support_fn,
        label="random_2d",
    )


# ---------------------------------------------------------------------------
# Geometry
# ---------------------------------------------------------------------------


def hausdorff_ball_fit(body: ConvexBody) -> tuple[float, float]:
    """(r, ε) with (1-ε) r B ⊂ K ⊂ (1+ε) r B at grid resolution."""
    hi, lo = float(np.max(body.radial)), float(np.min(body.radial))
    return 0.5 * (hi + lo), (hi - lo) / (hi + lo)


def bp5_radius_bounds(eps: float) -> tuple[float, float]:
    """Admissible r for a BP5-normalized body ε-close to rB: 1/(1+ε) ≤ r ≤ 1/(1-ε)"""
    return 1.0 / (1.0 + eps), 1.0 / (1.0 - eps)


def bp8_radius_bounds(eps: float, dim_n: int) -> tuple[float, float]:
    """Admissible r for a BP8-normalized body: (1-ε)/(1+ε)^{n+1} ≤ r^n ≤ (1+ε)/(1-ε)^{n+1}"""
    lo = (1.0 - eps) / (1.0 + eps) ** (dim_n + 1)
    hi = (1.0 + eps) / (1.0 - eps) ** (dim_n + 1)
    return lo ** (1.0 / dim_n), hi ** (1.0 / dim_n)


def radial_power_funk(
    body: ConvexBody, power: float, poles: np.ndarray | None = None
) -> np.ndarray:
    """ℛ[ρ^power] at the given poles (grid nodes by default)."""
    poles = body.grid.nodes if poles is None else np.atleast_2d(poles)
    if body.radial_fn is None and float(power).is_integer() and power > 0:
        count = default_circle_count(int(power) * body.band_limit)
    else:
        count = EXACT_CIRCLE_COUNT
    return funk_average(lambda p: body.radial_at(p) ** power, poles, count)


def section_volume(body: ConvexBody, theta: np.ndarray) -> float | np.ndarray:
    """vol_{n-1}(K ∩ θ^⊥) = κ_{n-1} ℛ[ρ^{n-1}](θ)"""
    theta = np.asarray(theta, dtype=float)
    values = ball_volume(body.dim_n - 1) * radial_power_funk(body, body.dim_n - 1, theta)
    return float(values[0]) if theta.ndim == 1 else values


def cone_volume(body: ConvexBody, theta: np.ndarray) -> float | np.ndarray:
    """(1/n) h(θ) vol_{n-1}(K ∩ θ^⊥)"""
    theta = np.asarray(theta, dtype=float)
    values = (
        np.atleast_1d(section_volume(body, theta)) * body.support_at(theta) / body.dim_n
    )
    return float(values[0]) if theta.ndim == 1 else values


def surface_area(body: ConvexBody) -> float:
    """Σ(K) = ∫ A h dm_{n-1} with the curvature function A h."""
    check_convexity(body)
    curvature = monge_ampere(body.grid, body.support_coeffs)
    return sphere_area(body.dim_n) * integrate(body.grid, curvature)


def second_moment(body: ConvexBody) -> np.ndarray:
    """∫_K y yᵀ dy = |S^{n-1}|/(n+2) ∫ ρ^{n+2} u uᵀ dσ"""
    n = body.dim_n
    weights = body.grid.weights * body.radial ** (n + 2)
    return sphere_area(n) / (n + 2) * np.einsum("p,pi,pj->ij", weights, body.grid.nodes, body.grid.nodes)


def isotropic_position(body: ConvexBody, max_refinements: int = 6) -> tuple[np.ndarray, ConvexBody]:
    """Return (T, T⁻¹K) with det T = 1 and ∫_{T⁻¹K} y yᵀ dy a multiple of Id.

    T = sqrt(det(S̃)^{-1/n} S̃) with S̃ the second moment divided by that of
    the unit ball. The square root is recomputed on the repositioned body until
    the quadrature moments are isotropic to rounding.
    """
    n = body.dim_n
    unit_moment = sphere_area(n) / (n + 2) / n
    identity = np.eye(n)
    total = identity.copy()
    current = body
    for _ in range(max_refinements):
        scaled = second_moment(current) / unit_moment
        det = np.linalg.det(scaled)
        if not np.isfinite(det) or det <= 0:
            raise SphereRigidityError("second-moment matrix is singular")
        scaled = scaled * det ** (-1.0 / n)
        # symmetric square root of the unit-determinant moment
        vals, vecs = np.linalg.eigh(scaled)
        root = (vecs * np.sqrt(vals)) @ vecs.T
        if np.max(np.abs(root - identity)) < 1e-14:
            break
        # T⁻¹ acts on the original body, never on the current iterate
        total = total @ root
        current = apply_linear(body, np.linalg.inv(total))
    if current is not body:
        current = ConvexBody(
            current.grid,
            current.band_limit,
            current.radial,
            current.radial_coeffs,
            current.radial_fn,
            current.support_fn,
            label=f"isotropic({body.label})",
        )
    return total, current


def ellipsoid_fit_distance(body: ConvexBody) -> tuple[float, np.ndarray]:
    """Fit 1/ρ² ≈ uᵀQu by weighted least squares; return (max |ρ - ρ_fit|, Q)."""
    u = body.grid.nodes
    n = body.dim_n
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    design = np.stack([u[:, i] * u[:, j] * (1.0 if i == j else 2.0) for i, j in pairs], axis=1)
    root_w = np.sqrt(body.grid.weights)
    solution, *_ = np.linalg.lstsq(design * root_w[:, None], root_w / body.radial**2, rcond=None)
    quad = np.zeros((n, n))
    for (i, j), value in zip(pairs, solution, strict=True):
        quad[i, j] = quad[j, i] = value
    form = np.einsum("pi,ij,pj->p", u, quad, u)
    if np.min(form) <= 0:
        return math.inf, quad
    return float(np.max(np.abs(body.radial - form**-0.5))), quad


# ---------------------------------------------------------------------------
# Near-ball diagnostics
# ---------------------------------------------------------------------------


def lipschitz_check(body: ConvexBody, r0: float = 1.0) -> LipschitzResult:
    """Largest |ρ(x) - ρ(y)| / |x - y| over all node pairs against 5√δ."""
    delta = float(np.max(np.abs(body.radial - r0)))
    if delta > 1.0 / 25.0:
        raise SphereRigidityError(f"body is not near the ball: δ={delta:.4f} exceeds 1/25")
    distances = pdist(body.grid.nodes)
    jumps = pdist(body.radial[:, None])
    valid = distances > 0
    ratio = float(np.max(jumps[valid] / distances[valid])) if np.any(valid) else 0.0
    return LipschitzResult(delta=delta, bound=5.0 * math.sqrt(delta), max_ratio=ratio)


def linearization_constant(
    body: ConvexBody, alpha: float, beta: float, r0: float = 1.0, circle_count: int = 256
) -> float:
    """Smallest C with |(ℛ[ρ^α])^β - r₀^{αβ} - αβ r₀^{αβ-1} ℛ(ρ - r₀)| ≤ C δ ℛ|ρ - r₀| at the nodes."""
    nodes = body.grid.nodes
    delta = float(np.max(np.abs(body.radial - r0)))
    if delta == 0:
        return 0.0
    power = funk_average(lambda p: body.radial_at(p) ** alpha, nodes, circle_count) ** beta
    linear = funk_average(lambda p: body.radial_at(p) - r0, nodes, circle_count)
    spread = funk_average(lambda p: np.abs(body.radial_at(p) - r0), nodes, circle_count)
    ab = alpha * beta
    gap = np.abs(power - r0**ab - ab * r0 ** (ab - 1) * linear)
    valid = spread > 0
    return float(np.max(gap[valid] / (delta * spread[valid]))) if np.any(valid) else 0.0


def support_gap_constant(body: ConvexBody, degree_split: int, eps: float) -> float:
    """Smallest C with h - ρ ≤ ε‖η‖ + C·Mν, η the degrees 1..l and ν the rest of h."""
    h = body.support
    coeffs = body.support_coeffs
    eta = project_band(coeffs, 1, degree_split)
    nu = h - coeffs.mean - synthesize(eta, body.grid)
    excess = h - body.radial - eps * l2_norm(eta)
    if not np.any(excess > 0):
        return 0.0
    mnu = maximal_function(body.grid, nu)
    positive = excess > 0
    if np.any(mnu[positive] == 0):
        return math.inf
    return float(np.max(excess[positive] / mnu[positive]))
