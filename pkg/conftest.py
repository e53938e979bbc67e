"""Shared fixtures: grids are expensive to build, so they live for the session."""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from src.sphere_core import build_grid


@pytest.fixture(scope="session")
def sphere_grid():
    """S^2 grid exact to degree 67; band limits up to 33"""
    return build_grid(3, 34)


@pytest.fixture(scope="session")
def fine_sphere_grid():
    """S^2 grid for the Monge-Ampère solver, band limits up to 41"""
    return build_grid(3, 42)


@pytest.fixture(scope="session")
def circle_grid():
    return build_grid(2, 128)


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20240611)
