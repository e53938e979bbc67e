"""Busemann-Petty residuals, contraction operators and rigidity scans.

BP5 asks whether h · ℛ[ρ^{n-1}] = const forces an ellipsoid, BP8 whether
A h = const · (ℛ[ρ^{n-1}])^{n+1} does. Near the ball both equations
linearize to diagonal operators whose multipliers are computed here.
"""

import math
from collections.abc import Callable
from contextlib import nullcontext
from fractions import Fraction

import numpy as np
from scipy.integrate import quad, trapezoid
from scipy.linalg import null_space
from scipy.optimize import brentq

from .body import (
    ConvexBody,
    hausdorff_ball_fit,
    isotropic_position,
    perturbed_ball,
    radial_power_funk,
    random_convex_body_2d,
    random_near_ball,
)
from .entities import (
    BPResidual,
    CapAverageInstance,
    CapAverageResult,
    ContractionCheck,
    CapInequalityInstance,
    CapInequalityResult,
    Problem,
    RigidityScanResult,
    ScanRow,
)
from .errors import ConvexityError, NonConvexPerturbationError, SphereRigidityError
from .harmonics import analyze, synthesize, synthesize_at
from .logger import ExperimentLogger
from .operators import (
    OperatorSpectrum,
    funk_multiplier,
    funk_multiplier_exact,
    laplace_multiplier,
    monge_ampere,
)
from .sphere_core import SphericalGrid, great_circle_points, integrate, normalize

CAP_INEQUALITY_CONSTANT = 35.0
CAP_AVERAGE_RINGS = 16
CAP_AVERAGE_SPOKES = 32
MAX_REJECTED_DRAWS = 10


# ---------------------------------------------------------------------------
# Residuals
# ---------------------------------------------------------------------------


def _fitted_residual(
    body: ConvexBody, lhs: np.ndarray, rhs: np.ndarray, problem: Problem
) -> BPResidual:
    grid = body.grid
    c = integrate(grid, lhs * rhs) / integrate(grid, rhs * rhs)
    residual = lhs - c * rhs
    band_limit = min(body.band_limit, grid.max_band_limit)
    energies = analyze(grid, residual, band_limit).degree_energies()
    return BPResidual(
        problem=problem,
        dim_n=grid.dim_n,
        l2_residual=math.sqrt(max(integrate(grid, residual**2), 0.0)),
        sup_residual=float(np.max(np.abs(residual))),
        normalization_constant=float(c),
        per_degree_breakdown={m: float(math.sqrt(e)) for m, e in enumerate(energies)},
    )


def _section_transform(body: ConvexBody) -> np.ndarray:
    funk = radial_power_funk(body, body.dim_n - 1)
    if np.min(funk) <= 0:
        raise SphereRigidityError("ℛ[ρ^{n-1}] must be positive")
    return funk


def bp5_residual(body: ConvexBody) -> BPResidual:
    """h - c (ℛ[ρ^{n-1}])^{-1} with c fitted by least squares"""
    return _fitted_residual(body, body.support, 1.0 / _section_transform(body), Problem.BP5)


def bp8_residual(body: ConvexBody) -> BPResidual:
    """A h - c (ℛ[ρ^{n-1}])^{n+1} with c fitted by least squares"""
    curvature = monge_ampere(body.grid, body.support_coeffs)
    funk = _section_transform(body)
    return _fitted_residual(body, curvature, funk ** (body.dim_n + 1), Problem.BP8)


def residual(problem: Problem, body: ConvexBody) -> BPResidual:
    return bp5_residual(body) if problem == Problem.BP5 else bp8_residual(body)


# ---------------------------------------------------------------------------
# Contraction operators
# ---------------------------------------------------------------------------


def _require_dimension(n: int) -> None:
    if n < 3:
        raise SphereRigidityError(f"contraction operators need n >= 3, got n={n}")


def bp5_mu(m: int, n: int) -> Fraction:
    """μ_m = -(n-1) λ_m for even m ≥ 4, 0 otherwise"""
    if m < 4 or m % 2:
        return Fraction(0)
    return -(n - 1) * funk_multiplier_exact(m, n)


def bp8_mu(m: int, n: int) -> Fraction:
    """μ_m = (n-1)(n+1) λ_m / ((1-m)(m+n-1)); μ_2 = 1 and odd degrees vanish."""
    if m % 2:
        return Fraction(0)
    return Fraction(n * n - 1, laplace_multiplier(m, n)) * funk_multiplier_exact(m, n)


def bp5_contraction_spectrum(n: int, band_limit: int) -> OperatorSpectrum:
    _require_dimension(n)
    values = np.array([float(bp5_mu(m, n)) for m in range(band_limit + 1)])
    return OperatorSpectrum(n, "bp5", values)


def bp8_contraction_spectrum(n: int, band_limit: int) -> OperatorSpectrum:
    """The exported operator keeps μ_m for even m ≥ 4 only"""
    _require_dimension(n)
    values = np.array(
        [float(bp8_mu(m, n)) if m >= 4 else 0.0 for m in range(band_limit + 1)]
    )
    return OperatorSpectrum(n, "bp8", values)


def contraction_spectrum(problem: Problem, n: int, band_limit: int) -> OperatorSpectrum:
    if problem == Problem.BP5:
        return bp5_contraction_spectrum(n, band_limit)
    return bp8_contraction_spectrum(n, band_limit)


def is_strong_contraction(spectrum: OperatorSpectrum, m_lo: int = 4) -> bool:
    """max |μ_m| < 1 over even m ≥ m_lo and |μ_m| non-increasing past the maximum."""
    degrees = np.arange(m_lo, spectrum.band_limit + 1, 2)
    if degrees.size == 0:
        return True
    values = np.abs(spectrum.multipliers[degrees])
    peak = int(np.argmax(values))
    return bool(values[peak] < 1.0 and np.all(np.diff(values[peak:]) <= 1e-15))


def contraction_verify(
    body: ConvexBody, spectrum: OperatorSpectrum, c: float = 1.0
) -> ContractionCheck:
    grid = body.grid
    r0 = body.radial_coeffs.mean
    deviation = body.radial - r0
    delta = float(np.max(np.abs(deviation)))
    deviation_norm = math.sqrt(integrate(grid, deviation**2))
    if deviation_norm <= 1e-14 * max(abs(r0), 1.0):
        return ContractionCheck(delta=delta, flag="ball")
    coeffs = body.radial_coeffs.plus_constant(-r0)
    limit = min(coeffs.band_limit, spectrum.band_limit)
    contracted = synthesize(spectrum.apply(coeffs.with_band_limit(limit)), grid)
    gap = body.support - c * contracted
    gap = gap - integrate(grid, gap)
    lhs = math.sqrt(max(integrate(grid, gap**2), 0.0))
    return ContractionCheck(lhs=lhs, rhs_ratio=lhs / deviation_norm, delta=delta)


# ---------------------------------------------------------------------------
# Rigidity scans
# ---------------------------------------------------------------------------


def predicted_slope(problem: Problem, m: int, n: int) -> float:
    """Linearized residual growth along ρ = 1 + tY_m, with ‖Y_m‖ = 1"""
    lam = funk_multiplier(m, n)
    if problem == Problem.BP5:
        return abs(1.0 + (n - 1) * lam)
    return abs(laplace_multiplier(m, n) - (n - 1) * (n + 1) * lam)


def fit_slope_through_origin(t_values: list[float], residuals: list[float]) -> float:
    t = np.asarray(t_values, dtype=float)
    r = np.asarray(residuals, dtype=float)
    return float(t @ r / (t @ t))


def fit_residual_growth(t_values: list[float], residuals: list[float]) -> tuple[float, float]:
    """Least-squares r ≈ a·t + b·t², returning (a, b).

    With a single t only the line through the origin is determined and b = 0.
    """
    if len(t_values) < 2:
        return fit_slope_through_origin(t_values, residuals), 0.0
    t = np.asarray(t_values, dtype=float)
    design = np.column_stack([t, t * t])
    (a, b), *_ = np.linalg.lstsq(design, np.asarray(residuals, dtype=float), rcond=None)
    return float(a), float(b)


def rigidity_scan(
    grid: SphericalGrid,
    problem: Problem,
    m: int,
    t_list: list[float],
    band_limit: int,
    k: int = 0,
    prune_nonconvex: bool = False,
    logger: ExperimentLogger | None = None,
) -> RigidityScanResult:
    """Residual of perturbed balls 1 + tY_{m,k} after isotropic positioning."""
    t_values = [float(t) for t in t_list]
    if not t_values or any(t <= 0 for t in t_values) or any(
        b <= a for a, b in zip(t_values, t_values[1:], strict=False)
    ):
        raise SphereRigidityError(f"t values must be positive and strictly increasing: {t_list}")

    bodies: dict[float, ConvexBody] = {}
    failing: list[float] = []
    for t in t_values:
        try:
            bodies[t] = perturbed_ball(grid, m, k, t, band_limit)
        except ConvexityError:
            failing.append(t)
    if failing and not prune_nonconvex:
        raise NonConvexPerturbationError(m, failing)
    if not bodies:
        raise NonConvexPerturbationError(m, failing)

    rows: list[ScanRow] = []
    kept_t: list[float] = []
    residual_values: list[float] = []
    for t in t_values:
        if t not in bodies:
            rows.append(
                ScanRow(
                    problem=problem,
                    dim_n=grid.dim_n,
                    band_limit=band_limit,
                    degree=m,
                    t=t,
                    status="pruned: nonconvex",
                )
            )
            continue
        _, positioned = isotropic_position(bodies[t])
        result = residual(problem, positioned)
        kept_t.append(t)
        residual_values.append(result.l2_residual)
        rows.append(
            ScanRow(
                problem=problem,
                dim_n=grid.dim_n,
                band_limit=band_limit,
                degree=m,
                t=t,
                residual_l2=result.l2_residual,
                residual_sup=result.sup_residual,
            )
        )
        if logger:
            logger.logger.debug(f"{problem} m={m} t={t:g} residual={result.l2_residual:.6e}")

    # slope is the linear part of a·t + b·t²
    slope, curvature = fit_residual_growth(kept_t, residual_values)
    scan = RigidityScanResult(
        problem=problem,
        dim_n=grid.dim_n,
        degree=m,
        t_values=kept_t,
        residual_values=residual_values,
        fitted_slope=slope,
        predicted_slope=predicted_slope(problem, m, grid.dim_n),
        fitted_curvature=curvature,
        pruned_t=failing,
        rows=rows,
    )
    if logger:
        logger.log_operation(
            "rigidity_scan",
            {"problem": str(problem), "m": m, "k": k, "t": t_values},
            {
                "fitted": scan.fitted_slope,
                "curvature": scan.fitted_curvature,
                "predicted": scan.predicted_slope,
                "pruned": failing,
            },
        )
    return scan


# ---------------------------------------------------------------------------
# Radon curves (planar counterexample)
# ---------------------------------------------------------------------------


class RadonArc:
    """Support function h(φ) = Σ a_j cos(jφ) on the quarter arc [0, π/2].

    The coefficients are projected so that h'(0) = h'(π/2) = 0, which makes the
    arc's boundary points sweep exactly the first quadrant.
    """

    TABLE_SIZE = 4097

    def __init__(self, coefficients: list[float] | np.ndarray):
        raw = np.asarray(coefficients, dtype=float)
        if raw.ndim != 1 or raw.size == 0:
            raise SphereRigidityError("arc needs at least one cosine coefficient")
        self.orders = np.arange(raw.size)
        constraint = (-self.orders * np.sin(self.orders * np.pi / 2))[None, :]
        if np.any(constraint):
            basis = null_space(constraint)
            raw = basis @ (basis.T @ raw)
        self.coefficients = raw
        self._phi_table = np.linspace(0.0, np.pi / 2, self.TABLE_SIZE)
        self._psi_table = self.direction(self._phi_table)

    def h(self, phi: np.ndarray) -> np.ndarray:
        return np.cos(np.outer(phi, self.orders)) @ self.coefficients

    def dh(self, phi: np.ndarray) -> np.ndarray:
        return -np.sin(np.outer(phi, self.orders)) @ (self.orders * self.coefficients)

    def ddh(self, phi: np.ndarray) -> np.ndarray:
        return -np.cos(np.outer(phi, self.orders)) @ (self.orders**2 * self.coefficients)

    def direction(self, phi: np.ndarray) -> np.ndarray:
        """Polar angle of the boundary point with outer normal at angle φ"""
        phi = np.atleast_1d(phi)
        return phi + np.arctan2(self.dh(phi), self.h(phi))

    def check_convex(self) -> None:
        phi = np.linspace(0.0, np.pi / 2, self.TABLE_SIZE)
        h = self.h(phi)
        if np.min(h) <= 0:
            bad = float(phi[int(np.argmin(h))])
            raise ConvexityError("arc support function is not positive", location=bad)
        radius = self.ddh(phi) + h
        if np.min(radius) <= 0:
            bad = int(np.argmin(radius))
            raise ConvexityError(
                "arc fails h'' + h > 0", location=float(phi[bad]), margin=float(radius[bad])
            )

    def radial(self, psi: np.ndarray) -> np.ndarray:
        """ρ on [0, π/2] by inverting the monotone map φ -> direction(φ)."""
        psi = np.clip(np.atleast_1d(psi), 0.0, np.pi / 2)
        phi = np.empty_like(psi)
        slots = np.clip(np.searchsorted(self._psi_table, psi) - 1, 0, self.TABLE_SIZE - 2)
        for i, (target, slot) in enumerate(zip(psi, slots, strict=True)):
            lo, hi = self._phi_table[slot], self._phi_table[slot + 1]
            f_lo = self._psi_table[slot] - target
            f_hi = self._psi_table[slot + 1] - target
            if f_lo >= 0:
                phi[i] = lo
            elif f_hi <= 0:
                phi[i] = hi
            else:
                phi[i] = brentq(
                    lambda p, target=target: float(self.direction(p)[0]) - target,
                    lo,
                    hi,
                    xtol=1e-15,
                    rtol=4 * np.finfo(float).eps,
                )
        return np.hypot(self.h(phi), self.dh(phi))


def radon_curve_build(
    grid: SphericalGrid, arc_coeffs: list[float] | np.ndarray, band_limit: int | None = None
) -> ConvexBody:
    """Planar body whose boundary satisfies h(θ) ρ(θ + π/2) = const.

    The arc fixes h on [0, π/2]; on [π/2, π) the support and radial functions
    are h(θ) = c / ρ(θ - π/2) and ρ(θ) = c / h(θ - π/2), then both extend by
    evenness.
    """
    if grid.dim_n != 2:
        raise SphereRigidityError("Radon curves live in the plane")
    arc = RadonArc(arc_coeffs)
    arc.check_convex()
    c = float(arc.h(np.array([0.0]))[0] * arc.h(np.array([np.pi / 2]))[0])
    quarter = np.pi / 2

    def support_fn(points: np.ndarray) -> np.ndarray:
        phi = np.mod(np.arctan2(points[:, 1], points[:, 0]), np.pi)
        first = phi <= quarter
        out = np.empty(phi.size)
        out[first] = arc.h(phi[first])
        out[~first] = c / arc.radial(phi[~first] - quarter)
        return out

    def radial_fn(points: np.ndarray) -> np.ndarray:
        psi = np.mod(np.arctan2(points[:, 1], points[:, 0]), np.pi)
        first = psi <= quarter
        out = np.empty(psi.size)
        out[first] = arc.radial(psi[first])
        out[~first] = c / arc.h(psi[~first] - quarter)
        return out

    return ConvexBody.from_radial_fn(
        grid,
        band_limit or grid.max_band_limit,
        radial_fn,
        support_fn,
        label="radon_curve",
    )


def bp5_residual_2d(body: ConvexBody) -> BPResidual:
    """Residual of h(θ) · 2ρ(θ + π/2) - c at the grid angles."""
    if body.dim_n != 2:
        raise SphereRigidityError("bp5_residual_2d needs a planar body")
    grid = body.grid
    nodes = grid.nodes
    quarter_turn = np.stack([-nodes[:, 1], nodes[:, 0]], axis=1)
    values = body.support_at(nodes) * 2.0 * body.radial_at(quarter_turn)
    return _fitted_residual(body, values, np.ones(grid.size), Problem.BP5)


# ---------------------------------------------------------------------------
# The explicit cap inequality in the plane
# ---------------------------------------------------------------------------


def cap_inequality_check(
    body: ConvexBody,
    radius: float | None = None,
    fractions: tuple[float, ...] = (1.0, 0.75, 0.5, 0.25),
    samples: int = 256,
) -> CapInequalityResult:
    """|ω(e)| ≤ (35/ϑ) ∫_{ϑ/5}^{ϑ} |ω(e'(t))| dt for ω = h - R, whenever h(e) ≤ R cos ϑ.

    e'(t) is the direction clockwise from e at angle t; the integral uses the
    trapezoid rule on ``samples`` points.
    """
    if body.dim_n != 2:
        raise SphereRigidityError("the cap inequality is checked on planar bodies")
    radius = hausdorff_ball_fit(body)[0] if radius is None else radius
    angles = body.grid.longitude
    h_e = body.support_at(body.grid.nodes)
    admissible = h_e < radius
    instances: list[CapInequalityInstance] = []
    violations: list[CapInequalityInstance] = []
    worst = 0.0
    for angle, value in zip(angles[admissible], h_e[admissible], strict=True):
        limit = math.acos(value / radius)
        for fraction in fractions:
            vartheta = fraction * limit
            if vartheta <= 0:
                continue
            t = np.linspace(vartheta / 5.0, vartheta, samples)
            clockwise = angle - t
            points = np.stack([np.cos(clockwise), np.sin(clockwise)], axis=1)
            omega = np.abs(body.support_at(points) - radius)
            rhs = CAP_INEQUALITY_CONSTANT / vartheta * float(trapezoid(omega, t))
            lhs = abs(value - radius)
            instance = CapInequalityInstance(angle=float(angle), vartheta=vartheta, lhs=lhs, rhs=rhs)
            instances.append(instance)
            worst = max(worst, lhs / rhs if rhs > 0 else math.inf)
            if lhs > rhs:
                violations.append(instance)
    return CapInequalityResult(bodies=1, instances=len(instances), violations=violations, worst_ratio=worst)


def cap_inequality_sweep(
    grid: SphericalGrid,
    rng: np.random.Generator,
    count: int,
    amplitude: float = 0.3,
    logger: ExperimentLogger | None = None,
) -> CapInequalityResult:
    """Run cap_inequality_check over ``count`` random planar convex bodies."""
    total = CapInequalityResult(bodies=0, instances=0, worst_ratio=0.0)
    for _ in range(count):
        body = random_convex_body_2d(grid, rng, amplitude=amplitude)
        result = cap_inequality_check(body)
        total = CapInequalityResult(
            bodies=total.bodies + 1,
            instances=total.instances + result.instances,
            violations=total.violations + result.violations,
            worst_ratio=max(total.worst_ratio, result.worst_ratio),
        )
    if logger:
        logger.log_operation(
            "cap_inequality_sweep",
            {"count": count, "amplitude": amplitude},
            {"instances": total.instances, "violations": len(total.violations)},
        )
    return total


# ---------------------------------------------------------------------------
# Cap averages on S^{n-1}
# ---------------------------------------------------------------------------


def cap_average_bound(vartheta: float, n: int) -> float:
    """C(ϑ) = 35 ∫_0^ϑ sin^{n-2}t dt / (ϑ sin^{n-2}(ϑ/5)).

    Averaging the planar inequality over the great circles through e gives
    |ω(e)| ≤ C(ϑ) times the σ-average of |ω| over S_ϑ(e). C(ϑ) tends to
    35·5^{n-2}/(n-1) as ϑ → 0 and stays bounded on (0, π/2).
    """
    if not 0.0 < vartheta < math.pi / 2:
        raise SphereRigidityError(f"cap angle must lie in (0, π/2), got {vartheta}")
    mass, _ = quad(lambda t: math.sin(t) ** (n - 2), 0.0, vartheta)
    return CAP_INEQUALITY_CONSTANT * mass / (vartheta * math.sin(vartheta / 5.0) ** (n - 2))


def polar_cap_average(
    evaluator: Callable[[np.ndarray], np.ndarray],
    centers: np.ndarray,
    varthetas: np.ndarray,
    rings: int = CAP_AVERAGE_RINGS,
    spokes: int = CAP_AVERAGE_SPOKES,
) -> np.ndarray:
    """σ-average of f over S_ϑ(e) for every pair (e, ϑ).

    Points are e cos t + v sin t with Gauss-Legendre angles t ∈ (0, ϑ) weighted
    by sin^{n-2} t, and v equispaced on the great subsphere e^⊥.
    """
    centers = normalize(np.atleast_2d(np.asarray(centers, dtype=float)))
    varthetas = np.broadcast_to(np.asarray(varthetas, dtype=float), centers.shape[:1])
    n = centers.shape[1]
    nodes, gauss = np.polynomial.legendre.leggauss(rings)
    t = 0.5 * (nodes + 1.0)[None, :] * varthetas[:, None]
    # the ϑ/2 Jacobian cancels between numerator and cap measure
    weights = gauss[None, :] * np.sin(t) ** (n - 2)
    spokes_at = great_circle_points(centers, spokes)
    points = (
        np.cos(t)[:, :, None, None] * centers[:, None, None, :]
        + np.sin(t)[:, :, None, None] * spokes_at[:, None, :, :]
    )
    values = np.asarray(evaluator(points.reshape(-1, n)), dtype=float).reshape(points.shape[:3])
    return np.sum(weights * values.mean(axis=2), axis=1) / np.sum(weights, axis=1)


def cap_average_check(
    body: ConvexBody,
    radius: float | None = None,
    fractions: tuple[float, ...] = (1.0, 0.5, 0.25),
    stride: int = 7,
) -> CapAverageResult:
    """|ω(e)| ≤ C(ϑ) ⨍_{S_ϑ(e)} |ω| for ω = h - R, whenever h(e) ≤ R cos ϑ.

    Centers are every ``stride``-th grid node with 0 < h(e) < R; for each one
    ϑ runs over ``fractions`` of the largest admissible angle arccos(h(e)/R).
    h is evaluated from the band-limited support coefficients.
    """
    n = body.dim_n
    coeffs = body.support_coeffs
    radius = hausdorff_ball_fit(body)[0] if radius is None else radius

    def deviation(points: np.ndarray) -> np.ndarray:
        return np.abs(synthesize_at(coeffs, points) - radius)

    nodes = body.grid.nodes[::stride]
    h_e = synthesize_at(coeffs, nodes)
    admissible = (h_e > 0) & (h_e < radius)
    centers, values = nodes[admissible], h_e[admissible]
    limits = np.arccos(values / radius)

    result = CapAverageResult(dim_n=n, bodies=1, instances=0, worst_ratio=0.0)
    for fraction in fractions:
        varthetas = fraction * limits
        usable = varthetas > 0
        if not np.any(usable):
            continue
        averages = polar_cap_average(deviation, centers[usable], varthetas[usable])
        lhs = np.abs(values[usable] - radius)
        for center, vartheta, dev, avg in zip(
            centers[usable], varthetas[usable], lhs, averages, strict=True
        ):
            bound = cap_average_bound(float(vartheta), n)
            ratio = dev / avg if avg > 0 else math.inf
            result.instances += 1
            if ratio > result.worst_ratio:
                result.worst_ratio = float(ratio)
                result.worst_vartheta = float(vartheta)
            if ratio > bound:
                result.violations.append(
                    CapAverageInstance(
                        center=center.tolist(),
                        vartheta=float(vartheta),
                        deviation=float(dev),
                        cap_average=float(avg),
                        bound=bound,
                    )
                )
    return result


def cap_average_sweep(
    grid: SphericalGrid,
    band_limit: int,
    rng: np.random.Generator,
    count: int,
    delta: float = 0.02,
    stride: int = 7,
    logger: ExperimentLogger | None = None,
) -> CapAverageResult:
    """Run cap_average_check over ``count`` random convex bodies with max |ρ - 1| = δ.

    Draws that fail the convexity certificate are redrawn and counted in
    ``rejected_bodies``.
    """
    params = {"count": count, "delta": delta, "band_limit": band_limit, "stride": stride}
    total = CapAverageResult(dim_n=grid.dim_n, bodies=0, instances=0, worst_ratio=0.0)
    with logger.timed("cap_average_sweep", params) if logger else nullcontext({}) as record:
        while total.bodies < count:
            if total.rejected_bodies > MAX_REJECTED_DRAWS * count:
                raise SphereRigidityError(
                    f"too many nonconvex draws at delta={delta}; lower delta or max_degree"
                )
            try:
                body = random_near_ball(grid, band_limit, rng, delta)
            except ConvexityError:
                total.rejected_bodies += 1
                continue
            result = cap_average_check(body, stride=stride)
            total.bodies += 1
            total.instances += result.instances
            total.violations.extend(result.violations)
            if result.worst_ratio > total.worst_ratio:
                total.worst_ratio = result.worst_ratio
                total.worst_vartheta = result.worst_vartheta
        record.update(
            {
                "instances": total.instances,
                "worst_ratio": total.worst_ratio,
                "violations": len(total.violations),
                "rejected": total.rejected_bodies,
            }
        )
    return total
