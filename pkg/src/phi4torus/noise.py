"""Mode-wise Brownian driver and exact sampling of the linear dynamics.

All randomness is counter-based: a draw is a pure function of
(seed, purpose, member, step), realized with a Philox generator whose
counter encodes the stream coordinates.  A full master-box of Hermitian
complex normals is produced per step, so restricting to any sub-band
|k|_inf <= N < master cutoff yields exactly the same low-mode noise --
the property nested refinement couplings rely on.

Unit normalization: ``unit_noise`` returns a Hermitian box W with
E|W(k)|^2 = 1 per mode (the k = 0 entry is real with variance 1), matching
a family of complex Brownian modes carrying one real Brownian motion per
unordered pair {k, -k}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import FourierField, symbol_box

__all__ = [
    "ModeDriver",
    "OUState",
    "brownian_increment",
    "ou_stationary_sample",
    "ou_transition_step",
    "stochastic_convolution_increment",
    "transition_decay",
    "transition_noise_variance",
]

# stream purposes (counter word 2)
PURPOSE_DRIVER = 0
PURPOSE_INITIAL = 1
PURPOSE_CHAIN = 2
PURPOSE_AUX = 3


@dataclass(frozen=True)
class ModeDriver:
    """Reproducible Hermitian Gaussian streams on a fixed master box."""

    seed: int
    dim: int
    master_cutoff: int
    member: int = 0

    def spawn(self, member: int) -> "ModeDriver":
        """Driver for another ensemble member (independent streams)."""
        return ModeDriver(self.seed, self.dim, self.master_cutoff, member)

    def _generator(self, step: int, purpose: int) -> np.random.Generator:
        counter = [0, int(step), int(purpose), int(self.member)]
        return np.random.Generator(
            np.random.Philox(key=[int(self.seed) & (2**64 - 1), 0xA5C3], counter=counter)
        )

    def unit_noise(self, step: int, purpose: int = PURPOSE_DRIVER) -> np.ndarray:
        """Hermitian complex-normal box with unit per-mode variance."""
        g = self._generator(step, purpose)
        shape = (2 * self.master_cutoff + 1,) * self.dim
        z = (g.standard_normal(shape) + 1j * g.standard_normal(shape)) / np.sqrt(2.0)
        return (z + np.conj(np.flip(z))) / np.sqrt(2.0)

    def restrict_box(self, box: np.ndarray, cutoff: int) -> np.ndarray:
        if cutoff > self.master_cutoff:
            raise ValueError("cutoff exceeds the master box")
        m = self.master_cutoff
        sl = (slice(m - cutoff, m + cutoff + 1),) * self.dim
        return box[sl]


@dataclass(frozen=True)
class OUState:
    """Mode-diagonal Gaussian state with its generating symbol."""

    field: FourierField
    time: float
    symbol_kind: str
    eps: float
    mass: float = 0.0

    def symbols(self) -> np.ndarray:
        return symbol_box(self.field.dim, self.field.cutoff, self.eps,
                          self.symbol_kind, self.mass)


def _mean_zero(coeffs: np.ndarray, cutoff: int, dim: int) -> np.ndarray:
    coeffs[(cutoff,) * dim] = 0.0
    return coeffs


def brownian_increment(driver: ModeDriver, cutoff: int, delta: float,
                       step: int, mean_zero: bool = True) -> FourierField:
    """Band-restricted Wiener increment, per-real-mode variance delta."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    w = driver.restrict_box(driver.unit_noise(step), cutoff) * np.sqrt(delta)
    if mean_zero:
        w = _mean_zero(w.copy(), cutoff, driver.dim)
    return FourierField(driver.dim, cutoff, np.ascontiguousarray(w), mean_zero=mean_zero)


def _stationary_std(symbols: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        var = np.where(symbols > 0, 1.0 / (2.0 * symbols), 0.0)
    return np.sqrt(var)


def ou_stationary_sample(driver: ModeDriver, cutoff: int,
                         symbol_kind: str = "continuum", eps: float = 1.0,
                         mass: float = 0.0, mean_zero: bool = True,
                         step: int = 0, purpose: int = PURPOSE_INITIAL) -> OUState:
    """Exact draw from the stationary law: mode variance 1/(2 lambda_k)."""
    sym = symbol_box(driver.dim, cutoff, eps, symbol_kind, mass)
    if not mean_zero and sym[(cutoff,) * driver.dim] <= 0:
        raise ValueError("zero symbol at k = 0: set mean_zero or a mass shift")
    w = driver.restrict_box(driver.unit_noise(step, purpose), cutoff)
    coeffs = w * _stationary_std(sym)
    if mean_zero:
        coeffs = _mean_zero(coeffs.copy(), cutoff, driver.dim)
    field = FourierField(driver.dim, cutoff, np.ascontiguousarray(coeffs),
                         mean_zero=mean_zero)
    return OUState(field, 0.0, symbol_kind, eps, mass)


def transition_decay(symbols: np.ndarray, delta: float) -> np.ndarray:
    return np.exp(-symbols * delta)


def transition_noise_variance(symbols: np.ndarray, delta: float) -> np.ndarray:
    """Variance (1 - e^{-2 lambda d}) / (2 lambda), continuous at lambda = 0."""
    x = 2.0 * symbols * delta
    small = np.abs(x) < 1e-8
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(small, delta * (1.0 - x / 2.0 + x**2 / 6.0),
                     -np.expm1(-x) / np.where(small, 1.0, 2.0 * symbols))
    return v


def stochastic_convolution_increment(driver: ModeDriver, cutoff: int,
                                     symbols: np.ndarray, delta: float,
                                     step: int, mean_zero: bool = True) -> np.ndarray:
    """Exact additive-noise box for one exponential-integrator step.

    Same underlying unit stream as ``brownian_increment`` at this step, so
    nested couplings and pathwise accumulators stay consistent.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    w = driver.restrict_box(driver.unit_noise(step), cutoff)
    incr = w * np.sqrt(transition_noise_variance(symbols, delta))
    if mean_zero:
        incr = _mean_zero(incr.copy(), cutoff, driver.dim)
    return incr


def ou_transition_step(state: OUState, delta: float, driver: ModeDriver,
                       step: int) -> OUState:
    """Exact linear transition X -> e^{-lambda d} X + eta, stationarity-preserving."""
    if delta == 0:
        return state
    sym = state.symbols()
    cutoff = state.field.cutoff
    eta = stochastic_convolution_increment(driver, cutoff, sym, delta, step,
                                           mean_zero=state.field.mean_zero)
    coeffs = transition_decay(sym, delta) * state.field.coeffs + eta
    field = FourierField(state.field.dim, cutoff, coeffs,
                         mean_zero=state.field.mean_zero)
    return OUState(field, state.time + delta, state.symbol_kind, state.eps,
                   state.mass)
