#!/usr/bin/env python3
"""Quadrature grids and sphere geometry"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

sys.path.insert(0, str(Path(__file__).parent))

from src.errors import SphereRigidityError, UnsupportedDimensionError
from src.sphere_core import (
    ball_volume,
    band_limit_exact,
    build_grid,
    cap_nodes,
    close_node_pairs,
    great_circle,
    great_circle_points,
    integrate,
    sphere_area,
    tangent_frame,
)


@pytest.mark.parametrize("dim_n, resolution", [(2, 16), (3, 12)])
def test_weights_are_a_probability_measure(dim_n, resolution):
    grid = build_grid(dim_n, resolution)
    assert grid.weights.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.all(grid.weights > 0)
    assert np.allclose(np.linalg.norm(grid.nodes, axis=1), 1.0, atol=1e-15)


def test_nodes_are_exactly_antipodal(sphere_grid, circle_grid):
    for grid in (sphere_grid, circle_grid):
        assert np.array_equal(grid.nodes[grid.antipode], -grid.nodes)
        assert np.array_equal(grid.antipode[grid.antipode], np.arange(grid.size))


def test_polynomial_moments(sphere_grid, circle_grid):
    z = sphere_grid.nodes[:, 2]
    assert integrate(sphere_grid, z**2) == pytest.approx(1.0 / 3.0, abs=1e-14)
    assert integrate(sphere_grid, z**4) == pytest.approx(1.0 / 5.0, abs=1e-14)
    x = circle_grid.nodes[:, 0]
    assert integrate(circle_grid, x**2) == pytest.approx(0.5, abs=1e-14)


def test_integrate_is_rotation_invariant(sphere_grid, rng):
    rotation = Rotation.from_euler("zyx", [0.3, 1.1, -0.8]).as_matrix()
    coefficients = rng.standard_normal(3)

    def sextic(points: np.ndarray) -> np.ndarray:
        x, y, z = points.T
        return coefficients[0] * x**2 * y**4 + coefficients[1] * x * y * z**4 + coefficients[2] * z**6

    turned = sphere_grid.nodes @ rotation.T
    assert integrate(sphere_grid, sextic(turned)) == pytest.approx(
        integrate(sphere_grid, sextic(sphere_grid.nodes)), abs=1e-13
    )


def test_exact_degree():
    assert band_limit_exact(3, 34) == 67
    assert band_limit_exact(2, 128) == 127
    assert build_grid(3, 34).max_band_limit == 33


def test_rejects_bad_grids():
    with pytest.raises(UnsupportedDimensionError, match="dimension not implemented"):
        build_grid(4, 10)
    with pytest.raises(SphereRigidityError):
        build_grid(2, 15)
    with pytest.raises(SphereRigidityError):
        build_grid(3, 2)


def test_integrate_checks_sample_count(sphere_grid):
    with pytest.raises(SphereRigidityError):
        integrate(sphere_grid, np.ones(3))


def test_tangent_frame_is_orthonormal(sphere_grid):
    frame = tangent_frame(sphere_grid.nodes)
    assert frame.shape == (sphere_grid.size, 2, 3)
    gram = np.einsum("pan,pbn->pab", frame, frame)
    assert np.allclose(gram, np.eye(2)[None], atol=1e-14)
    assert np.allclose(np.einsum("pan,pn->pa", frame, sphere_grid.nodes), 0.0, atol=1e-14)


def test_great_circle_lies_in_the_orthogonal_plane():
    pole = np.array([1.0, 2.0, -0.5])
    circle = great_circle(pole, 16)
    assert circle.samples.shape == (16, 3)
    assert np.allclose(circle.samples @ circle.pole, 0.0, atol=1e-14)
    assert np.allclose(np.linalg.norm(circle.samples, axis=1), 1.0)
    assert circle.weights.sum() == pytest.approx(1.0)


def test_great_circle_on_the_circle_is_an_antipodal_pair():
    points = great_circle_points(np.array([[1.0, 0.0]]), 99)
    assert points.shape == (1, 2, 2)
    assert np.allclose(np.abs(points[0]), [[0.0, 1.0], [0.0, 1.0]])


def test_great_circle_rejects_degenerate_input():
    with pytest.raises(SphereRigidityError):
        great_circle(np.zeros(3), 16)
    with pytest.raises(SphereRigidityError):
        great_circle(np.array([0.0, 0.0, 1.0]), 3)


def test_great_circle_needs_eight_samples_on_the_sphere():
    pole = np.array([0.0, 0.0, 1.0])
    with pytest.raises(SphereRigidityError, match="at least 8"):
        great_circle(pole, 7)
    with pytest.raises(SphereRigidityError, match="at least 8"):
        great_circle_points(pole[None, :], 4)
    assert great_circle(pole, 8).samples.shape == (8, 3)
    assert great_circle(np.array([1.0, 0.0]), 3).samples.shape == (2, 2)


def test_caps(sphere_grid):
    north = np.array([0.0, 0.0, 1.0])
    assert cap_nodes(sphere_grid, north, math.pi).size == sphere_grid.size
    half = cap_nodes(sphere_grid, north, math.pi / 2)
    assert half.size == sphere_grid.size // 2
    with pytest.raises(SphereRigidityError):
        cap_nodes(sphere_grid, north, 0.0)


def test_close_pairs_respect_the_angle(sphere_grid):
    pairs = close_node_pairs(sphere_grid, 2 * sphere_grid.spacing)
    assert pairs.size > 0
    cosines = np.einsum("pn,pn->p", sphere_grid.nodes[pairs[:, 0]], sphere_grid.nodes[pairs[:, 1]])
    assert np.all(np.arccos(np.clip(cosines, -1, 1)) <= 2 * sphere_grid.spacing + 1e-12)


def test_areas_and_volumes():
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert ball_volume(2) == pytest.approx(math.pi)
    assert ball_volume(3) == pytest.approx(4 * math.pi / 3)
