# Sphere rigidity toolkit
"""Spectral operators on the sphere and Busemann-Petty rigidity experiments."""

__version__ = "0.1.0"
