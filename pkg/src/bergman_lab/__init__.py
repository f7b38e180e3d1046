"""Numerical laboratory for Bergman kernels of positive and singular line bundles on curves."""

__version__ = "0.1.0"

from .errors import BergmanLabError  # noqa: E402,F401
