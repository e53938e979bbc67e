#!/usr/bin/env python3
"""Convex bodies: closed forms, support/radial conversion, convexity and geometry"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from src.body import (
    ConvexBody,
    apply_linear,
    ball,
    bp5_radius_bounds,
    bp8_radius_bounds,
    check_convexity,
    cone_volume,
    convexity_margin,
    ellipsoid,
    ellipsoid_fit_distance,
    gauge_margin,
    hausdorff_ball_fit,
    isotropic_position,
    linearization_constant,
    lipschitz_check,
    perturbed_ball,
    radial_from_support,
    support_gap_constant,
    random_convex_body_2d,
    random_near_ball,
    section_volume,
    support_from_radial,
    surface_area,
)
from src.errors import ConvexityError, SphereRigidityError
from src.harmonics import HarmonicCoeffs, analyze
from src.sphere_core import build_grid, normalize

SPHERE = build_grid(3, 34)
BAND = 16
AXES = np.array([1.1, 1.0, 0.9])


def test_ball_is_exact():
    body = ball(SPHERE, BAND, radius=1.5)
    assert np.all(body.radial == 1.5)
    assert np.allclose(body.support, 1.5)
    assert convexity_margin(body) == pytest.approx(1.5)
    assert hausdorff_ball_fit(body) == (1.5, 0.0)


def test_radial_function_must_be_positive():
    with pytest.raises(SphereRigidityError, match="positive"):
        ConvexBody.from_coeffs(SPHERE, HarmonicCoeffs.constant(3, 4, -1.0))


def test_numerical_support_matches_ellipsoid():
    exact = ellipsoid(SPHERE, BAND, axes=AXES)
    sampled = ConvexBody.from_radial_fn(SPHERE, BAND, exact.radial_fn)
    numeric = support_from_radial(sampled)
    assert np.allclose(numeric, np.linalg.norm(SPHERE.nodes * AXES, axis=1), atol=1e-6)


def test_numerical_radial_matches_ellipsoid():
    exact = ellipsoid(SPHERE, BAND, axes=AXES)
    radial = radial_from_support(SPHERE, exact.support, BAND, exact.support_fn)
    assert np.allclose(radial, exact.radial, atol=1e-6)


def test_radial_from_support_rejects_nonconvex_data():
    z = SPHERE.nodes[:, 2]
    dented = 1.0 + 0.3 * (35 * z**4 - 30 * z**2 + 3) / 8
    with pytest.raises(ConvexityError, match="convexity certificate"):
        radial_from_support(SPHERE, dented, BAND)


def test_linear_image_of_ball_is_an_ellipsoid():
    image = apply_linear(ball(SPHERE, BAND), np.diag(AXES))
    reference = ellipsoid(SPHERE, BAND, axes=AXES)
    assert np.allclose(image.radial, reference.radial, atol=1e-14)
    assert np.allclose(image.support, reference.support, atol=1e-14)


def test_perturbed_ball_needs_even_degree():
    with pytest.raises(SphereRigidityError, match="even degree"):
        perturbed_ball(SPHERE, 3, 0, 0.01, BAND)


def test_perturbed_ball_reports_maximal_admissible_t():
    with pytest.raises(ConvexityError) as info:
        perturbed_ball(SPHERE, 4, 0, 0.3, BAND)
    limit = info.value.max_admissible_t
    assert 0.0 < limit < 0.3
    body = perturbed_ball(SPHERE, 4, 0, 0.9 * limit, BAND)
    assert gauge_margin(SPHERE, body.radial_coeffs) >= -1e-8


def test_perturbed_ball_is_convex():
    body = perturbed_ball(SPHERE, 4, 0, 0.01, BAND)
    assert body.radial_coeffs.coeff(4, 0) == pytest.approx(0.01)
    assert check_convexity(body) > 0.5


def test_isotropic_position_rounds_ellipsoids():
    body = ellipsoid(SPHERE, BAND, axes=AXES)
    transform, positioned = isotropic_position(body)
    assert np.linalg.det(transform) == pytest.approx(1.0, abs=1e-12)
    spread = np.ptp(positioned.radial)
    assert spread <= 1e-5 * positioned.radial.mean()


def test_isotropic_position_kills_degree_two_moment(rng):
    body = random_near_ball(SPHERE, BAND, rng, 0.03)
    _, positioned = isotropic_position(body)
    power = analyze(SPHERE, positioned.radial**5, BAND)
    degree_two = math.sqrt(power.degree_energies()[2])
    assert degree_two <= 1e-8 * math.sqrt(power.values @ power.values)


def test_ellipsoid_fit_distance():
    distance, quad = ellipsoid_fit_distance(ellipsoid(SPHERE, BAND, axes=AXES))
    assert distance <= 1e-10
    assert np.allclose(quad, np.diag(1.0 / AXES**2), atol=1e-10)
    body = perturbed_ball(SPHERE, 4, 0, 0.01, BAND)
    assert ellipsoid_fit_distance(body)[0] >= 1e-3


def test_surface_area_of_ball_and_spheroid():
    assert surface_area(ball(SPHERE, BAND, 2.0)) == pytest.approx(16 * math.pi, rel=1e-10)
    a, c = 1.05, 0.95
    e = math.sqrt(1 - c**2 / a**2)
    expected = 2 * math.pi * a**2 * (1 + (1 - e**2) / e * math.atanh(e))
    spheroid = ellipsoid(SPHERE, BAND, axes=[a, a, c])
    assert surface_area(spheroid) == pytest.approx(expected, rel=1e-6)


def test_sections_and_cones_of_a_ball():
    body = ball(SPHERE, BAND, 2.0)
    theta = np.array([0.0, 0.6, 0.8])
    assert section_volume(body, theta) == pytest.approx(4 * math.pi)
    assert cone_volume(body, theta) == pytest.approx(8 * math.pi / 3)


def test_ellipsoid_section_volume():
    body = ellipsoid(SPHERE, BAND, axes=AXES)
    # K ∩ e_3^⊥ is the ellipse with semi-axes 1.1 and 1.0
    assert section_volume(body, np.array([0.0, 0.0, 1.0])) == pytest.approx(math.pi * 1.1, rel=1e-12)


def test_radius_bounds():
    assert bp5_radius_bounds(0.0) == (1.0, 1.0)
    lo, hi = bp8_radius_bounds(0.01, 3)
    assert lo < 1.0 < hi


def test_lipschitz_certificate(rng):
    body = random_near_ball(SPHERE, BAND, rng, 0.03)
    result = lipschitz_check(body)
    assert result.delta == pytest.approx(0.03)
    assert result.holds
    with pytest.raises(SphereRigidityError, match="near the ball"):
        lipschitz_check(ball(SPHERE, BAND, 1.05))


@pytest.mark.slow
def test_lipschitz_certificate_on_many_bodies():
    rng = np.random.default_rng(7)
    for delta in rng.uniform(0.005, 0.03, size=100):
        assert lipschitz_check(random_near_ball(SPHERE, BAND, rng, delta)).holds


def test_near_ball_diagnostics_vanish_on_the_ball():
    body = ball(SPHERE, BAND)
    assert linearization_constant(body, 2.0, 4.0) == 0.0
    assert support_gap_constant(body, 4, 0.1) == 0.0


def test_linearization_constant_is_moderate(rng):
    body = random_near_ball(SPHERE, 8, rng, 0.01)
    constant = linearization_constant(body, 2.0, 4.0, circle_count=64)
    assert 0.0 < constant < 100.0


def test_random_planar_body(rng):
    grid = build_grid(2, 128)
    body = random_convex_body_2d(grid, rng, amplitude=0.2)
    assert np.array_equal(body.radial, body.radial[grid.antipode])
    assert np.all(body.support >= body.radial - 1e-12)
    assert np.max(np.abs(body.support - 1.0)) <= 0.2 + 1e-12
    with pytest.raises(SphereRigidityError):
        random_convex_body_2d(SPHERE, rng)


@pytest.mark.parametrize("seed", range(3))
def test_cone_volume_scales_with_the_determinant(seed):
    rng = np.random.default_rng(seed)
    body = random_near_ball(SPHERE, BAND, rng, 0.02)
    transform = np.diag(rng.uniform(0.8, 1.25, size=3))
    image = apply_linear(body, transform)
    theta = normalize(rng.standard_normal((4, 3)))
    # T maps θ^⊥ onto the hyperplane with normal T⁻ᵀθ
    image_theta = normalize(theta @ np.linalg.inv(transform))
    expected = abs(np.linalg.det(transform)) * cone_volume(body, theta)
    assert np.allclose(cone_volume(image, image_theta), expected, rtol=1e-5)


def test_support_gap_constant_is_stable_on_ellipsoids_and_near_balls(rng):
    ellipsoid_constants = [
        support_gap_constant(ellipsoid(SPHERE, BAND, axes=[1 + d, 1.0, 1 - d]), 2, 1e-3)
        for d in (0.02, 0.04)
    ]
    assert all(0.0 < c < 50.0 for c in ellipsoid_constants)
    # h - ρ and the degree ≥ 4 part of h both shrink like the squared eccentricity
    assert 0.5 <= ellipsoid_constants[0] / ellipsoid_constants[1] <= 2.0
    for delta in (0.01, 0.03):
        constant = support_gap_constant(random_near_ball(SPHERE, BAND, rng, delta), 2, 1e-3)
        assert 0.0 <= constant < 50.0
