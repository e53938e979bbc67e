"""Quadrature grids on S^1 and S^2, great circles and spherical caps.

All integrals are taken against the normalized surface measure σ, so the
weights of every grid sum to one and the mean of a function is its integral.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import gamma as gamma_fn
from scipy.special import roots_legendre

from .errors import SphereRigidityError, UnsupportedDimensionError

SUPPORTED_DIMENSIONS = (2, 3)
MIN_CIRCLE_SAMPLES = 8


@dataclass(frozen=True, eq=False)
class SphericalGrid:
    """Product quadrature grid on S^{n-1}.

    For n=3 nodes are ordered latitude-major: index = i * nlon + j with the
    colatitudes θ_i the Gauss-Legendre angles and φ_j = 2πj / nlon. For n=2
    the nodes are the N equispaced angles φ_j = 2πj / N.
    """

    dim_n: int
    resolution: int
    nodes: np.ndarray
    weights: np.ndarray
    band_limit_exact: int
    colatitude: np.ndarray
    longitude: np.ndarray
    antipode: np.ndarray
    nlat: int
    nlon: int
    spacing: float = field(default=0.0)

    @property
    def size(self) -> int:
        return int(self.nodes.shape[0])

    @property
    def max_band_limit(self) -> int:
        """Largest band limit whose products are still integrated exactly"""
        return self.band_limit_exact // 2

    def symmetrize(self, values: np.ndarray) -> np.ndarray:
        """Even part of a field, exact under the antipodal node pairing"""
        values = np.asarray(values, dtype=float)
        return 0.5 * (values + values[self.antipode])


def band_limit_exact(dim_n: int, resolution: int) -> int:
    if dim_n == 3:
        return 2 * resolution - 1
    if dim_n == 2:
        return resolution - 1
    raise UnsupportedDimensionError(dim_n)


def build_grid(dim_n: int, resolution: int) -> SphericalGrid:
    """Build the product quadrature grid for S^{n-1}, n ∈ {2, 3}."""
    if dim_n not in SUPPORTED_DIMENSIONS:
        raise UnsupportedDimensionError(dim_n)
    if resolution < 4:
        raise SphereRigidityError(f"resolution must be at least 4, got {resolution}")

    if dim_n == 2:
        if resolution % 2:
            raise SphereRigidityError(f"resolution must be even for n=2, got {resolution}")
        count = resolution
        phi = 2.0 * np.pi * np.arange(count) / count
        half = count // 2
        nodes = np.empty((count, 2))
        nodes[:half, 0] = np.cos(phi[:half])
        nodes[:half, 1] = np.sin(phi[:half])
        nodes[half:] = -nodes[:half]
        antipode = (np.arange(count) + half) % count
        weights = np.full(count, 1.0 / count)
        return SphericalGrid(
            dim_n=2,
            resolution=resolution,
            nodes=nodes,
            weights=weights,
            band_limit_exact=band_limit_exact(2, resolution),
            colatitude=np.full(count, 0.5 * np.pi),
            longitude=phi,
            antipode=antipode,
            nlat=1,
            nlon=count,
            spacing=2.0 * np.pi / count,
        )

    nlat = resolution
    nlon = 2 * resolution
    x, w = roots_legendre(nlat)
    # exact mirror symmetry of the latitude rule
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    theta = np.arccos(x)
    phi = 2.0 * np.pi * np.arange(nlon) / nlon

    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    colat = tt.ravel()
    lon = pp.ravel()
    s = np.sin(colat)
    nodes = np.stack([s * np.cos(lon), s * np.sin(lon), np.cos(colat)], axis=1)

    ii, jj = np.meshgrid(np.arange(nlat), np.arange(nlon), indexing="ij")
    antipode = ((nlat - 1 - ii) * nlon + (jj + nlon // 2) % nlon).ravel()
    first = np.arange(nodes.shape[0]) < antipode
    nodes[antipode[first]] = -nodes[first]

    weights = np.repeat(0.5 * w / nlon, nlon)
    weights = weights / weights.sum()

    return SphericalGrid(
        dim_n=3,
        resolution=resolution,
        nodes=nodes,
        weights=weights,
        band_limit_exact=band_limit_exact(3, resolution),
        colatitude=colat,
        longitude=lon,
        antipode=antipode,
        nlat=nlat,
        nlon=nlon,
        spacing=np.pi / resolution,
    )


def integrate(grid: SphericalGrid, samples: np.ndarray) -> float:
    """Σ w_i f(u_i), the σ-mean of a field sampled at the grid nodes."""
    samples = np.asarray(samples, dtype=float)
    if samples.shape[0] != grid.size:
        raise SphereRigidityError(
            f"sample count {samples.shape[0]} does not match node count {grid.size}"
        )
    return float(np.tensordot(grid.weights, samples, axes=(0, 0)))


def l2_field_norm(grid: SphericalGrid, samples: np.ndarray) -> float:
    samples = np.asarray(samples, dtype=float)
    return math.sqrt(max(integrate(grid, samples * samples), 0.0))


def normalize(vectors: np.ndarray) -> np.ndarray:
    vectors = np.asarray(vectors, dtype=float)
    norms = np.linalg.norm(vectors, axis=-1, keepdims=True)
    if np.any(norms == 0):
        raise SphereRigidityError("zero vector has no direction")
    return vectors / norms


def tangent_frame(points: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the tangent space at each point.

    Returns an array of shape (P, n-1, n).
    """
    points = normalize(np.atleast_2d(points))
    dim = points.shape[1]
    if dim == 2:
        return np.stack([-points[:, 1], points[:, 0]], axis=1)[:, None, :]
    if dim != 3:
        raise UnsupportedDimensionError(dim)
    # reference axis least aligned with each point
    ref = np.zeros_like(points)
    ref[np.arange(points.shape[0]), np.argmin(np.abs(points), axis=1)] = 1.0
    e1 = normalize(np.cross(ref, points))
    e2 = np.cross(points, e1)
    return np.stack([e1, e2], axis=1)


@dataclass(frozen=True)
class GreatCircle:
    pole: np.ndarray
    samples: np.ndarray
    weights: np.ndarray


def great_circle_points(poles: np.ndarray, count: int) -> np.ndarray:
    """Equispaced points of S^{n-1} ∩ θ^⊥ for every pole, shape (P, count, n).

    On S^1 the great subsphere is the antipodal pair, so count is ignored.
    """
    poles = normalize(np.atleast_2d(poles))
    frame = tangent_frame(poles)
    if poles.shape[1] == 2:
        perp = frame[:, 0, :]
        return np.stack([perp, -perp], axis=1)
    if count < MIN_CIRCLE_SAMPLES:
        raise SphereRigidityError(
            f"great circle needs at least {MIN_CIRCLE_SAMPLES} samples, got {count}"
        )
    angles = 2.0 * np.pi * np.arange(count) / count
    return (
        np.cos(angles)[None, :, None] * frame[:, None, 0, :]
        + np.sin(angles)[None, :, None] * frame[:, None, 1, :]
    )


def great_circle(pole: np.ndarray, count: int) -> GreatCircle:
    pole = np.asarray(pole, dtype=float)
    if not np.any(pole):
        raise SphereRigidityError("pole must be a nonzero vector")
    pole = normalize(pole)
    samples = great_circle_points(pole[None, :], count)[0]
    count = samples.shape[0]
    return GreatCircle(pole=pole, samples=samples, weights=np.full(count, 1.0 / count))


def cap_nodes(grid: SphericalGrid, center: np.ndarray, radius_angle: float) -> np.ndarray:
    """Indices of nodes in the closed cap {u : <center, u> >= cos(radius)}."""
    if not 0.0 < radius_angle <= np.pi:
        raise SphereRigidityError(f"cap radius must lie in (0, π], got {radius_angle}")
    center = normalize(np.asarray(center, dtype=float))
    threshold = math.cos(radius_angle) - 1e-12
    return np.flatnonzero(grid.nodes @ center >= threshold)


def close_node_pairs(grid: SphericalGrid, max_angle: float) -> np.ndarray:
    """Index pairs (i, j), i < j, of nodes within a geodesic distance."""
    tree = cKDTree(grid.nodes)
    chord = 2.0 * math.sin(0.5 * min(max_angle, np.pi))
    return tree.query_pairs(chord, output_type="ndarray")


def sphere_area(dim_n: int) -> float:
    """|S^{n-1}|, the unnormalized surface area of the unit sphere"""
    return float(2.0 * np.pi ** (dim_n / 2) / gamma_fn(dim_n / 2))


def ball_volume(dim_k: int) -> float:
    """κ_k, the volume of the unit ball of R^k"""
    return float(np.pi ** (dim_k / 2) / gamma_fn(dim_k / 2 + 1))


def spherical_angles(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Colatitude and longitude of unit vectors in R^3 (longitude only for R^2)."""
    points = np.atleast_2d(points)
    if points.shape[1] == 2:
        return np.full(points.shape[0], 0.5 * np.pi), np.arctan2(points[:, 1], points[:, 0])
    z = np.clip(points[:, 2], -1.0, 1.0)
    return np.arccos(z), np.arctan2(points[:, 1], points[:, 0])
