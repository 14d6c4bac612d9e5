"""Numerical trace formula toolkit: local orbital integrals, both sides of the
trace identity, and weighted equidistribution moments."""

__version__ = "0.1.0"
