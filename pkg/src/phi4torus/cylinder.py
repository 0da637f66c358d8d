"""Smooth cylinder functions with closed-form gradients.

A cylinder function is F(<l_1, x>, ..., <l_m, x>) with a fixed smooth outer
function, bounded with all derivatives, and band-limited real test fields
l_i.  The dictionary below is versioned: reversibility and Poincare numbers
quote it, so its members must not change silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fields import FourierField, inner_product, single_mode_field

__all__ = ["CylinderFunction", "dictionary", "DICTIONARY_VERSION"]

DICTIONARY_VERSION = "v1"


@dataclass(frozen=True)
class CylinderFunction:
    """outer(F) applied to pairings with the fields ls; grad closed-form."""

    name: str
    outer: Callable[..., float]
    outer_grad: Callable[..., tuple]
    ls: tuple[FourierField, ...]

    def arguments(self, x: FourierField) -> tuple[float, ...]:
        return tuple(inner_product(l, x) for l in self.ls)

    def __call__(self, x: FourierField) -> float:
        return float(self.outer(*self.arguments(x)))

    def partials(self, x: FourierField) -> tuple[float, ...]:
        return tuple(float(v) for v in self.outer_grad(*self.arguments(x)))

    def directional(self, x: FourierField, direction: FourierField) -> float:
        """d/ds f(x + s * direction) at s = 0."""
        parts = self.partials(x)
        return float(sum(p * inner_product(l, direction)
                         for p, l in zip(parts, self.ls)))

    def gradient_field(self, x: FourierField) -> FourierField:
        """Df(x) = sum_j dF_j * l_j as a field."""
        parts = self.partials(x)
        out = self.ls[0].scaled(parts[0])
        for p, l in zip(parts[1:], self.ls[1:]):
            out = out + l.scaled(p)
        return out

    def batch_eval(self, args: np.ndarray) -> np.ndarray:
        """Vectorized outer evaluation; args shape (m, ...)."""
        return self.outer(*args)

    def batch_partials(self, args: np.ndarray) -> list[np.ndarray]:
        return list(self.outer_grad(*args))


def _real_mode(dim: int, cutoff: int, k, sin: bool = False) -> FourierField:
    """Unit-norm real character: sqrt(2) cos / sin of pi k.xi (or constant)."""
    if all(ki == 0 for ki in k):
        # coefficient 1 at k = 0: the unit-norm constant 2^{-d/2}
        return single_mode_field(dim, cutoff, k, amplitude=0.5)
    amp = -0.5j if sin else 0.5
    f = single_mode_field(dim, cutoff, k, amplitude=amp)
    return f.scaled(math.sqrt(2.0))


def dictionary(dim: int, cutoff: int) -> list[CylinderFunction]:
    """The fixed five-member dictionary over low-frequency directions."""
    if dim == 3:
        l1 = _real_mode(dim, cutoff, (1, 0, 0))
        l2 = _real_mode(dim, cutoff, (0, 1, 0), sin=True)
        l3 = _real_mode(dim, cutoff, (1, 1, 0))
    else:
        l1 = _real_mode(dim, cutoff, (1, 0))
        l2 = _real_mode(dim, cutoff, (0, 1), sin=True)
        l3 = _real_mode(dim, cutoff, (1, 1))
    return [
        CylinderFunction("tanh<l1>", np.tanh,
                         lambda a: (1.0 / np.cosh(a) ** 2,), (l1,)),
        CylinderFunction("cos<l2>", np.cos,
                         lambda a: (-np.sin(a),), (l2,)),
        CylinderFunction("tanh<l1>cos<l2>",
                         lambda a, b: np.tanh(a) * np.cos(b),
                         lambda a, b: (np.cos(b) / np.cosh(a) ** 2,
                                       -np.tanh(a) * np.sin(b)), (l1, l2)),
        CylinderFunction("cos<l1>cos<l3>",
                         lambda a, b: np.cos(a) * np.cos(b),
                         lambda a, b: (-np.sin(a) * np.cos(b),
                                       -np.cos(a) * np.sin(b)), (l1, l3)),
        CylinderFunction("tanh<l2>tanh<l3>",
                         lambda a, b: np.tanh(a) * np.tanh(b),
                         lambda a, b: (np.tanh(b) / np.cosh(a) ** 2,
                                       np.tanh(a) / np.cosh(b) ** 2), (l2, l3)),
    ]
