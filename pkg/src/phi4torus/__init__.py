"""Spectral/lattice simulator and diagnostics for quartic fields on the torus."""

__version__ = "0.1.0"

from .fields import FourierField, LatticeField, RegularityParams  # noqa: F401
