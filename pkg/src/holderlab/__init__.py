"""Anisotropic variable-exponent Sobolev and Hölder norms on grids."""

__version__ = "0.1.0"
