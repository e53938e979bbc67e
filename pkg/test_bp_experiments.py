#!/usr/bin/env python3
"""Busemann-Petty residuals, contraction multipliers, rigidity scans and planar checks"""

import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from src.body import ball, ellipsoid, ellipsoid_fit_distance, isotropic_position, perturbed_ball
from src.bp_experiments import (
    CAP_INEQUALITY_CONSTANT,
    RadonArc,
    bp5_contraction_spectrum,
    bp5_mu,
    bp5_residual,
    bp5_residual_2d,
    bp8_contraction_spectrum,
    bp8_mu,
    bp8_residual,
    cap_average_bound,
    cap_average_check,
    cap_average_sweep,
    cap_inequality_check,
    cap_inequality_sweep,
    contraction_verify,
    fit_residual_growth,
    fit_slope_through_origin,
    is_strong_contraction,
    polar_cap_average,
    predicted_slope,
    radon_curve_build,
    rigidity_scan,
)
from src.entities import Problem
from src.errors import ConvexityError, NonConvexPerturbationError, SphereRigidityError
from src.operators import OperatorSpectrum
from src.sphere_core import build_grid

SPHERE = build_grid(3, 34)
CIRCLE = build_grid(2, 128)
BAND = 16
SCAN_T = [0.002, 0.004, 0.006, 0.008, 0.01]


def test_ball_residuals_vanish():
    body = ball(SPHERE, BAND, 1.3)
    for result in (bp5_residual(body), bp8_residual(body)):
        assert result.l2_residual <= 1e-10
        assert result.passes(1e-10)


def test_ball_normalization_constants():
    body = ball(SPHERE, BAND, 2.0)
    # h · ℛ[ρ²] = 2 · 4 and A h / ℛ[ρ²]^4 = 4 / 256
    assert bp5_residual(body).normalization_constant == pytest.approx(8.0)
    assert bp8_residual(body).normalization_constant == pytest.approx(4.0 / 256.0)


def test_multipliers():
    assert bp5_mu(4, 3) == Fraction(-3, 4)
    assert bp5_mu(2, 3) == 0
    assert bp8_mu(4, 3) == Fraction(-1, 6)
    assert bp8_mu(5, 3) == 0
    for n in range(3, 11):
        assert bp8_mu(2, n) == 1


@pytest.mark.parametrize("n", [3, 4, 7])
def test_spectra_are_strong_contractions(n):
    for spectrum in (bp5_contraction_spectrum(n, 64), bp8_contraction_spectrum(n, 64)):
        assert spectrum.max_abs(4)[1] < 1.0
        assert is_strong_contraction(spectrum)
    assert bp8_contraction_spectrum(n, 8).multiplier(2) == 0.0


def test_strong_contraction_detects_large_multipliers():
    values = np.zeros(9)
    values[6] = 1.5
    assert not is_strong_contraction(OperatorSpectrum(3, "custom", values))


def test_contraction_operators_need_three_dimensions():
    with pytest.raises(SphereRigidityError, match="n >= 3"):
        bp8_contraction_spectrum(2, 8)


def test_contraction_verify_flags_the_ball():
    check = contraction_verify(ball(SPHERE, BAND), bp5_contraction_spectrum(3, BAND))
    assert check.flag == "ball"
    assert check.lhs is None
    assert check.delta == 0.0


def test_contraction_verify_on_a_perturbed_ball():
    body = perturbed_ball(SPHERE, 4, 0, 0.004, BAND)
    spectrum = bp5_contraction_spectrum(3, BAND)
    check = contraction_verify(body, spectrum)
    assert check.flag == "ok"
    assert check.delta == pytest.approx(float(np.max(np.abs(body.radial - 1.0))))
    # h - 𝔐(ρ - 1) ≈ (1 - μ₄) t Y₄ with μ₄ = -3/4
    assert check.rhs_ratio == pytest.approx(predicted_slope(Problem.BP5, 4, 3), rel=0.05)

    scaled = contraction_verify(body.scaled(1.1), spectrum)
    assert scaled.rhs_ratio == pytest.approx(check.rhs_ratio, rel=1e-8)
    assert scaled.lhs == pytest.approx(1.1 * check.lhs, rel=1e-8)
    assert scaled.delta == pytest.approx(1.1 * check.delta, rel=1e-12)


def test_predicted_slopes():
    assert predicted_slope(Problem.BP5, 4, 3) == pytest.approx(1.75)
    assert predicted_slope(Problem.BP8, 4, 3) == pytest.approx(21.0)
    assert predicted_slope(Problem.BP5, 2, 3) == 0.0
    assert predicted_slope(Problem.BP8, 2, 3) == 0.0


def test_slope_through_origin():
    assert fit_slope_through_origin([1.0, 2.0], [3.0, 6.0]) == pytest.approx(3.0)


@pytest.mark.parametrize("seed", range(20))
def test_isotropic_ellipsoids_solve_both_problems(seed):
    axes = np.random.default_rng(seed).uniform(0.8, 1.25, size=3)
    _, positioned = isotropic_position(ellipsoid(SPHERE, BAND, axes=axes))
    assert bp5_residual(positioned).l2_residual <= 1e-5
    assert bp8_residual(positioned).l2_residual <= 1e-5
    assert np.ptp(positioned.radial) <= 1e-5


def test_residual_growth_fit_separates_the_quadratic_part():
    residuals = [1.5 * t + 40.0 * t * t for t in SCAN_T]
    slope, curvature = fit_residual_growth(SCAN_T, residuals)
    assert slope == pytest.approx(1.5, rel=1e-8)
    assert curvature == pytest.approx(40.0, rel=1e-5)
    # a straight-line fit through the origin picks up part of the t² term
    assert fit_slope_through_origin(SCAN_T, residuals) > 1.5 * 1.15
    assert fit_residual_growth([0.002], [0.004]) == (pytest.approx(2.0), 0.0)


def test_rigidity_slope_degree_four():
    scan = rigidity_scan(SPHERE, Problem.BP5, 4, SCAN_T, BAND)
    assert scan.pruned_t == []
    assert len(scan.rows) == len(SCAN_T)
    assert scan.slope_ratio == pytest.approx(1.0, abs=0.1)


@pytest.mark.slow
@pytest.mark.parametrize("problem", [Problem.BP5, Problem.BP8])
def test_rigidity_slope_degree_six(problem):
    scan = rigidity_scan(SPHERE, problem, 6, SCAN_T, BAND)
    assert scan.pruned_t == []
    assert scan.slope_ratio == pytest.approx(1.0, abs=0.1)


@pytest.mark.slow
@pytest.mark.parametrize("problem", [Problem.BP5, Problem.BP8])
def test_rigidity_degree_eight_loses_only_the_largest_t(problem):
    # the first trough of 1 + tY₈ stops being convex between t = 0.008 and 0.01
    scan = rigidity_scan(SPHERE, problem, 8, SCAN_T, BAND, prune_nonconvex=True)
    assert scan.t_values[:3] == SCAN_T[:3]
    assert 0.01 in scan.pruned_t
    assert scan.slope_ratio == pytest.approx(1.0, abs=0.1)


@pytest.mark.slow
@pytest.mark.parametrize("problem", [Problem.BP5, Problem.BP8])
@pytest.mark.parametrize("m", [10, 12])
def test_rigidity_high_degrees_inside_their_convexity_window(problem, m):
    scan = rigidity_scan(SPHERE, problem, m, [0.001] + SCAN_T, BAND, prune_nonconvex=True)
    assert scan.t_values[:2] == [0.001, 0.002]
    assert 0.01 in scan.pruned_t
    assert scan.slope_ratio == pytest.approx(1.0, abs=0.1)


@pytest.mark.slow
@pytest.mark.parametrize("problem", [Problem.BP5, Problem.BP8])
def test_degree_two_is_the_kernel_direction(problem):
    kernel = rigidity_scan(SPHERE, problem, 2, SCAN_T, BAND)
    reference = rigidity_scan(SPHERE, problem, 4, SCAN_T, BAND)
    assert abs(kernel.fitted_slope) <= 0.05 * reference.fitted_slope


def test_rigidity_scan_rejects_bad_input():
    with pytest.raises(SphereRigidityError, match="strictly increasing"):
        rigidity_scan(SPHERE, Problem.BP5, 4, [0.02, 0.01], BAND)
    with pytest.raises(NonConvexPerturbationError) as info:
        rigidity_scan(SPHERE, Problem.BP5, 4, [0.001, 0.4], BAND)
    assert info.value.failing_t == [0.4]


@pytest.mark.slow
def test_rigidity_scan_prunes_nonconvex_t():
    scan = rigidity_scan(SPHERE, Problem.BP5, 4, [0.001, 0.4], BAND, prune_nonconvex=True)
    assert scan.pruned_t == [0.4]
    assert scan.t_values == [0.001]
    assert scan.rows[1].status.startswith("pruned")


def test_radon_arc_is_projected_onto_the_boundary_conditions():
    arc = RadonArc([1.0, 0.1, 0.0, 0.0, 0.02])
    ends = np.array([0.0, np.pi / 2])
    assert np.allclose(arc.dh(ends), 0.0, atol=1e-15)
    assert np.allclose(arc.direction(ends), ends, atol=1e-15)


def test_radon_curve_is_a_planar_counterexample():
    body = radon_curve_build(CIRCLE, [1.0, 0.0, 0.0, 0.0, 0.02])
    assert bp5_residual_2d(body).l2_residual <= 1e-8
    assert ellipsoid_fit_distance(body)[0] >= 1e-3


def test_circle_arc_gives_the_disc():
    body = radon_curve_build(CIRCLE, [1.0])
    assert np.allclose(body.radial, 1.0, atol=1e-12)
    assert bp5_residual_2d(body).l2_residual <= 1e-12


def test_radon_curve_rejects_nonconvex_arcs():
    with pytest.raises(ConvexityError, match="h'' \\+ h"):
        radon_curve_build(CIRCLE, [1.0, 0.0, 0.0, 0.0, 0.1])
    with pytest.raises(SphereRigidityError, match="plane"):
        radon_curve_build(SPHERE, [1.0])


def test_planar_residual_needs_a_planar_body():
    with pytest.raises(SphereRigidityError):
        bp5_residual_2d(ball(SPHERE, BAND))


def test_cap_inequality_on_the_disc():
    result = cap_inequality_check(ball(CIRCLE, 32))
    assert result.instances == 0
    assert result.holds


def test_cap_inequality_on_random_bodies(rng):
    result = cap_inequality_sweep(CIRCLE, rng, 25)
    assert result.bodies == 25
    assert result.instances > 0
    assert result.holds


@pytest.mark.slow
def test_cap_inequality_thousand_bodies():
    result = cap_inequality_sweep(CIRCLE, np.random.default_rng(0), 1000)
    assert result.holds, result.violations[:3]


def test_cap_average_bound_limits():
    assert cap_average_bound(0.3, 2) == pytest.approx(CAP_INEQUALITY_CONSTANT)
    assert cap_average_bound(1e-4, 3) == pytest.approx(87.5, rel=1e-6)
    with pytest.raises(SphereRigidityError, match="π/2"):
        cap_average_bound(1.6, 3)


@pytest.mark.parametrize("vartheta", [0.1, 0.6, 1.2])
def test_polar_cap_average_of_the_height_function(vartheta):
    center = np.array([0.3, -0.4, np.sqrt(0.75)])
    height = polar_cap_average(lambda p: p @ center, center, vartheta)
    assert height[0] == pytest.approx((1.0 + np.cos(vartheta)) / 2.0, abs=1e-12)
    arc = polar_cap_average(lambda p: p[:, 0], np.array([1.0, 0.0]), vartheta)
    assert arc[0] == pytest.approx(np.sin(vartheta) / vartheta, abs=1e-12)


def test_cap_average_check_on_a_ball_inside_a_larger_radius():
    result = cap_average_check(ball(SPHERE, BAND), radius=1.2)
    assert result.instances > 0
    assert result.worst_ratio == pytest.approx(1.0, abs=1e-10)
    assert result.holds


def test_cap_average_sweep_on_near_balls(rng):
    result = cap_average_sweep(SPHERE, BAND, rng, 3, delta=0.02)
    assert result.dim_n == 3
    assert result.bodies == 3
    assert result.instances > 0
    assert result.holds, result.violations[:3]
    assert 0.0 < result.worst_ratio <= cap_average_bound(result.worst_vartheta, 3)
