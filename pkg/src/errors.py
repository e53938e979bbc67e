"""Exceptions raised by the toolkit.

Every error is a ``ValueError`` so callers that only guard against bad input
keep working; the subclasses let the CLI map failures to exit codes.
"""

from typing import Any


class SphereRigidityError(ValueError):
    """Base class for all toolkit errors"""


class UnsupportedDimensionError(SphereRigidityError):
    def __init__(self, dim_n: int):
        super().__init__(f"dimension not implemented: n={dim_n}")
        self.dim_n = dim_n


class AliasingError(SphereRigidityError):
    def __init__(self, band_limit: int, max_band_limit: int):
        super().__init__(
            f"aliasing risk: band limit {band_limit} exceeds {max_band_limit} for this grid"
        )
        self.band_limit = band_limit
        self.max_band_limit = max_band_limit


class ParityError(SphereRigidityError):
    """Raised when an operator defined on even functions receives odd energy"""

    def __init__(self, message: str, odd_energy: float):
        super().__init__(f"{message} (odd energy {odd_energy:.3e})")
        self.odd_energy = odd_energy


class ConvexityError(SphereRigidityError):
    """Convexity certificate failed.

    ``location`` is the offending node direction or angle, ``margin`` the least
    eigenvalue found and ``max_admissible_t`` is filled in by generators that
    can bracket the failure.
    """

    def __init__(
        self,
        message: str,
        location: Any = None,
        margin: float | None = None,
        max_admissible_t: float | None = None,
    ):
        details = []
        if location is not None:
            details.append(f"at {location}")
        if margin is not None:
            details.append(f"margin {margin:.3e}")
        if max_admissible_t is not None:
            details.append(f"maximal admissible t {max_admissible_t:.6g}")
        super().__init__(message + (" (" + ", ".join(details) + ")" if details else ""))
        self.location = location
        self.margin = margin
        self.max_admissible_t = max_admissible_t


class NonConvexPerturbationError(SphereRigidityError):
    def __init__(self, degree: int, failing_t: list[float]):
        super().__init__(f"nonconvex perturbation for m={degree} at t={failing_t}")
        self.degree = degree
        self.failing_t = failing_t


class SolverDivergenceError(SphereRigidityError):
    """The fixed-point iteration left the contraction regime"""

    def __init__(self, trace: Any):
        super().__init__("outside contraction regime: increments grew for 3 consecutive steps")
        self.trace = trace


class UsageError(SphereRigidityError):
    """Bad command-line usage or unreadable input file"""
