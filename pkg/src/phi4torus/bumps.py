"""Smooth radial plateau functions used for frequency multipliers.

Both the dyadic partition of unity and the spectral mollifier are built from
the same C^inf transition h(s) = f(s)/(f(s) + f(1-s)), f(s) = exp(-1/s).
"""

from __future__ import annotations

import numpy as np

__all__ = ["smooth_step", "plateau", "mollifier_symbol"]


def smooth_step(s):
    """C^inf monotone step: 0 for s <= 0, 1 for s >= 1."""
    s = np.asarray(s, dtype=float)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        f = np.where(s > 0, np.exp(-1.0 / np.maximum(s, 1e-300)), 0.0)
        g = np.where(1 - s > 0, np.exp(-1.0 / np.maximum(1 - s, 1e-300)), 0.0)
    return f / (f + g)


def plateau(r, inner: float, outer: float):
    """Radial C^inf plateau: 1 on [0, inner], 0 on [outer, inf)."""
    if not 0 < inner < outer:
        raise ValueError("need 0 < inner < outer")
    r = np.abs(np.asarray(r, dtype=float))
    return 1.0 - smooth_step((r - inner) / (outer - inner))


def mollifier_symbol(r):
    """The fixed smoothing symbol g: radial, g=1 on |x|<=1/2, supp in |x|<=1."""
    return plateau(r, 0.5, 1.0)
