"""Lattice height functions: counting, surface tension, Kirszbraun extension and limit-shape checks."""

__version__ = "0.1.0"
