"""Lattice Gibbs density, Metropolis-adjusted sampling, Dirichlet diagnostics.

The unnormalized log density on the (2N+1)^d sites is

    log rho(x) = -eps^{d-2} sum_edges (x(a) - x(b))^2
                 + c sum eps^d x^2 - (lam/2) sum eps^d x^4,

with c = 3 lam c0 - 9 lam^2 c1 - m.  Its directional derivative along a
band-limited l is 2<x, Lap_eps l> - 2<lam x^3 - c x, l>, the log-derivative
that also drives the Langevin dynamics: the dynamics module's drift is
exactly half this gradient, making the measure reversible for the flow.

Sampling uses that same exponential-integrator map as the proposal and
corrects it by a Metropolis-Hastings step, so the chain targets the density
exactly.  All estimators below are plain Monte Carlo means with standard
errors; nothing is fitted.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .besov import BesovIndex, besov_norms_batch
from .cylinder import CylinderFunction, dictionary
from .dynamics import TrajectoryRecord
from .fields import (
    FourierField,
    grid_forward,
    grid_inverse,
    inner_product,
    mesh_size,
    symbol_box,
)
from .noise import ModeDriver, transition_decay, transition_noise_variance
from .renorm import RenormConstants, counterterms_for

__all__ = [
    "GibbsSpec",
    "ChainConfig",
    "SampleSet",
    "gibbs_log_density",
    "log_density_gradient",
    "log_derivative",
    "sample_gibbs",
    "evolve_ensemble",
    "check_reversibility",
    "check_ibp",
    "dirichlet_form_estimate",
    "poincare_estimate",
    "moment_bound_report",
    "energy_solution_diagnostics",
    "exponential_moment_probe",
    "effective_sample_size",
    "split_rhat",
]


@dataclass(frozen=True)
class GibbsSpec:
    """Quartic lattice measure parameters (band N, full mode set)."""

    dim: int = 3
    n_modes: int = 1
    m: float = 1.0
    lam: float = 1.0
    counterterm_source: str = "lattice"

    @property
    def eps(self) -> float:
        return mesh_size(self.n_modes)

    def constants(self) -> RenormConstants:
        return counterterms_for(self.dim, self.n_modes, self.m, self.lam,
                                self.counterterm_source)

    def n_sites(self) -> int:
        return (2 * self.n_modes + 1) ** self.dim


@dataclass(frozen=True)
class ChainConfig:
    n_chains: int = 4
    n_steps: int = 4000
    burn_in: int = 1000
    thin: int = 5
    delta: float = 0.05
    seed: int = 0
    tune: bool = True


@dataclass
class SampleSet:
    """Thinned coefficient-box samples plus chain diagnostics."""

    spec: GibbsSpec
    samples: np.ndarray            # (n_samples,) + box
    acceptance: float
    delta: float
    ess: dict[str, float] = field(default_factory=dict)
    rhat: dict[str, float] = field(default_factory=dict)
    seed: int = 0

    def fields(self):
        for s in self.samples:
            yield FourierField(self.spec.dim, self.spec.n_modes, s,
                               mean_zero=False)


# ---------------------------------------------------------------------------
# density and gradient


def _lattice_values(stack: np.ndarray, dim: int) -> np.ndarray:
    return grid_inverse(stack, dim).real


def gibbs_log_density(spec: GibbsSpec, values: np.ndarray) -> np.ndarray:
    """Unnormalized log density of sitewise values (batch axes allowed)."""
    d = spec.dim
    eps = spec.eps
    consts = spec.constants()
    axes = tuple(range(-d, 0))
    kinetic = np.zeros(values.shape[:-d])
    for ax in axes:
        diff = np.roll(values, -1, axis=ax) - values
        kinetic = kinetic + np.sum(diff**2, axis=axes)
    quad = np.sum(values**2, axis=axes)
    quart = np.sum(values**4, axis=axes)
    return (-(eps ** (d - 2)) * kinetic
            + consts.mass_coefficient() * eps**d * quad
            - 0.5 * consts.lam * eps**d * quart)


def log_density_gradient(spec: GibbsSpec, stack: np.ndarray) -> np.ndarray:
    """Coefficient box of the density gradient field 2(Lap x - lam x^3 + c x).

    The pairing of this box with any band-limited direction l (in the L^2
    inner product) is the directional log-derivative b_l.
    """
    d = spec.dim
    consts = spec.constants()
    lam_box = symbol_box(d, spec.n_modes, spec.eps, "lattice")
    vals = _lattice_values(stack, d)
    cube = grid_forward(vals**3, d)
    return 2.0 * (-lam_box * stack - consts.lam * cube
                  + consts.mass_coefficient() * stack)


def log_derivative(spec: GibbsSpec, x: FourierField, direction: FourierField) -> float:
    """b_l(x) = 2 <x, Lap_eps l> - 2 <lam x^3 - c x, l>."""
    grad = log_density_gradient(spec, x.coeffs)
    g = FourierField(spec.dim, spec.n_modes, grad, mean_zero=False)
    return inner_product(g, direction)


# ---------------------------------------------------------------------------
# sampling


class _Proposal:
    """Exponential-integrator Gaussian proposal with its log density."""

    def __init__(self, spec: GibbsSpec, delta: float):
        self.spec = spec
        self.delta = delta
        self.sym = symbol_box(spec.dim, spec.n_modes, spec.eps, "lattice",
                              mass=spec.m)
        self.decay = transition_decay(self.sym, delta)
        with np.errstate(divide="ignore", invalid="ignore"):
            self.weight = np.where(
                self.sym > 1e-12,
                (1 - self.decay) / np.where(self.sym > 1e-12, self.sym, 1.0),
                delta)
        self.var = transition_noise_variance(self.sym, delta)
        self.consts = spec.constants()

    def drift(self, stack: np.ndarray) -> np.ndarray:
        # half the density gradient, mass part handled by the decay factor
        vals = _lattice_values(stack, self.spec.dim)
        cube = grid_forward(vals**3, self.spec.dim)
        coef = self.consts.mass_coefficient() + self.spec.m
        return -self.consts.lam * cube + coef * stack

    def mean(self, stack: np.ndarray) -> np.ndarray:
        return self.decay * stack + self.weight * self.drift(stack)

    def log_q(self, from_stack: np.ndarray, to_stack: np.ndarray) -> np.ndarray:
        """Hermitian-Gaussian transition log density (additive const dropped)."""
        diff = to_stack - self.mean(from_stack)
        d = self.spec.dim
        return -0.5 * np.sum(np.abs(diff) ** 2 / self.var,
                             axis=tuple(range(-d, 0))).real


def sample_gibbs(spec: GibbsSpec, chain: ChainConfig) -> SampleSet:
    """Metropolis-adjusted exponential-integrator chain targeting the density.

    The proposal is one integrator step of the gradient flow plus its exact
    Gaussian convolution noise; the Hastings correction makes the chain
    exactly reversible for the target.  The step size is pre-tuned toward a
    mid-range acceptance rate when ``tune`` is set.
    """
    driver = ModeDriver(chain.seed, spec.dim, spec.n_modes)
    rng = np.random.default_rng(np.random.Philox(
        key=[chain.seed & (2**64 - 1), 0x61BB], counter=[0, 0, 7, 0]))
    n_c = chain.n_chains
    box = (2 * spec.n_modes + 1,) * spec.dim

    def unit_stack(step):
        g = np.random.Generator(np.random.Philox(
            key=[chain.seed & (2**64 - 1), 0x51AB], counter=[0, step, 9, 0]))
        z = (g.standard_normal((n_c,) + box)
             + 1j * g.standard_normal((n_c,) + box)) / np.sqrt(2)
        axes = tuple(range(-spec.dim, 0))
        return (z + np.conj(np.flip(z, axis=axes))) / np.sqrt(2)

    delta = chain.delta
    prop = _Proposal(spec, delta)
    # cold-ish start from the Gaussian part of the measure
    init_std = np.sqrt(np.where(prop.sym > 0, 1.0 / (2 * prop.sym), 0.0))
    state = unit_stack(0) * init_std
    logp = gibbs_log_density(spec, _lattice_values(state, spec.dim))

    if chain.tune:
        for cycle in range(12):
            acc = _run_mala(spec, prop, state, logp, unit_stack, rng, 60,
                            offset=1 + cycle * 60)[2]
            if acc < 0.35:
                delta *= 0.6
            elif acc > 0.72:
                delta *= 1.4
            else:
                break
            prop = _Proposal(spec, delta)

    total = chain.burn_in + chain.n_steps
    state, logp, acc_rate, kept = _run_mala(
        spec, prop, state, logp, unit_stack, rng, total, offset=1000,
        keep_from=chain.burn_in, thin=chain.thin)
    if not 0.1 <= acc_rate <= 0.9:
        warnings.warn(f"acceptance rate {acc_rate:.2f} outside [0.1, 0.9]: "
                      "adjust the proposal step", stacklevel=2)
    samples = np.concatenate(kept) if kept else np.empty((0,) + box)
    sset = SampleSet(spec, samples, acc_rate, delta, seed=chain.seed)
    _chain_diagnostics(sset, kept, spec)
    return sset


def _run_mala(spec, prop, state, logp, unit_stack, rng, n_steps, offset,
              keep_from=None, thin=1):
    n_c = state.shape[0]
    kept = []
    accepted = 0
    for step in range(n_steps):
        eta = unit_stack(offset + step) * np.sqrt(prop.var)
        proposal = prop.mean(state) + eta
        logp_new = gibbs_log_density(spec, _lattice_values(proposal, spec.dim))
        log_alpha = (logp_new - logp
                     + prop.log_q(proposal, state)
                     - prop.log_q(state, proposal))
        u = rng.random(n_c)
        take = np.log(u) < log_alpha
        state = np.where(take.reshape((-1,) + (1,) * spec.dim), proposal, state)
        logp = np.where(take, logp_new, logp)
        accepted += int(take.sum())
        if keep_from is not None and step >= keep_from and \
                (step - keep_from) % thin == 0:
            kept.append(state.copy())
    return state, logp, accepted / (n_steps * n_c), kept


def _chain_diagnostics(sset: SampleSet, kept: list, spec: GibbsSpec):
    if not kept:
        return
    # probes: squared pairings with a few low modes, per chain
    arr = np.stack(kept)  # (n_kept, n_chains) + box
    center = (spec.n_modes,) * spec.dim
    probes = {"mode0_sq": np.abs(arr[(slice(None), slice(None)) + center]) ** 2}
    idx1 = tuple(np.array(center) + np.eye(spec.dim, dtype=int)[0])
    probes["mode1_sq"] = np.abs(arr[(slice(None), slice(None)) + idx1]) ** 2
    for name, series in probes.items():
        sset.ess[name] = effective_sample_size(series.reshape(series.shape[0], -1))
        sset.rhat[name] = split_rhat(series)


def effective_sample_size(series: np.ndarray) -> float:
    """Autocorrelation-time ESS, pooled over chains (Geyer truncation)."""
    n, m = series.shape
    x = series - series.mean(axis=0)
    ess_total = 0.0
    for c in range(m):
        v = x[:, c]
        var = np.var(v)
        if var == 0:
            ess_total += n
            continue
        acf = np.correlate(v, v, mode="full")[n - 1:] / (var * n)
        tau = 1.0
        for lag in range(1, min(n, 200)):
            if acf[lag] < 0.05:
                break
            tau += 2 * acf[lag]
        ess_total += n / tau
    return float(ess_total)


def split_rhat(series: np.ndarray) -> float:
    """Potential-scale-reduction statistic over split half-chains."""
    n, m = series.shape
    half = n // 2
    chains = np.concatenate([series[:half], series[half:2 * half]], axis=1)
    w = chains.var(axis=0, ddof=1).mean()
    b = half * chains.mean(axis=0).var(ddof=1)
    if w == 0:
        return 1.0
    return float(np.sqrt((half - 1) / half + b / (w * half)))


# ---------------------------------------------------------------------------
# vectorized dynamics for the estimators


def evolve_ensemble(spec: GibbsSpec, stack: np.ndarray, t: float, delta: float,
                    seed: int, purpose: int = 3) -> np.ndarray:
    """Unadjusted exponential-integrator evolution of a state stack.

    This is the plain Langevin chain (no Metropolis correction), the
    dynamics whose reversibility the estimators measure; its O(delta) bias
    is part of the quoted tolerances.
    """
    prop = _Proposal(spec, delta)
    n_steps = round(t / delta)
    box = stack.shape[1:]
    state = stack.copy()
    axes = tuple(range(-spec.dim, 0))
    for step in range(n_steps):
        g = np.random.Generator(np.random.Philox(
            key=[seed & (2**64 - 1), 0x7E57], counter=[0, step, purpose, 0]))
        z = (g.standard_normal(state.shape) + 1j * g.standard_normal(state.shape)) \
            / np.sqrt(2)
        w = (z + np.conj(np.flip(z, axis=axes))) / np.sqrt(2)
        state = prop.mean(state) + w * np.sqrt(prop.var)
    return state


# ---------------------------------------------------------------------------
# estimators


def _batch_args(f: CylinderFunction, stack: np.ndarray, spec: GibbsSpec) -> np.ndarray:
    d = spec.dim
    out = []
    for l in f.ls:
        box = l.coeffs
        if box.shape != stack.shape[1:]:
            from .fields import pad_box, project_pn

            lf = project_pn(l, spec.n_modes)
            box = lf.coeffs
        out.append(np.real(np.sum(stack * np.conj(box),
                                  axis=tuple(range(-d, 0)))))
    return np.stack(out)


def check_reversibility(spec: GibbsSpec, f: CylinderFunction,
                        g: CylinderFunction, t: float, starts: np.ndarray,
                        delta: float = 1e-3, seed: int = 0) -> tuple[float, float]:
    """MC estimate of int P_t f g dmu - int f P_t g dmu with standard error.

    One coupled evolution per start (common random numbers), so the
    statistic vanishes identically for f = g.
    """
    evolved = evolve_ensemble(spec, starts, t, delta, seed)
    f0 = f.batch_eval(_batch_args(f, starts, spec))
    g0 = g.batch_eval(_batch_args(g, starts, spec))
    ft = f.batch_eval(_batch_args(f, evolved, spec))
    gt = g.batch_eval(_batch_args(g, evolved, spec))
    diff = ft * g0 - f0 * gt
    return float(diff.mean()), float(diff.std(ddof=1) / math.sqrt(diff.size))


def check_ibp(spec: GibbsSpec, f: CylinderFunction, direction: FourierField,
              samples: np.ndarray) -> tuple[float, float]:
    """MC estimate of int df/dl dmu + int f b_l dmu (zero under the measure)."""
    from .fields import project_pn

    l = project_pn(direction, spec.n_modes)
    args = _batch_args(f, samples, spec)
    parts = f.batch_partials(args)
    df_dl = sum(p * inner_product(lj, l)
                for p, lj in zip(parts, f.ls))
    fx = f.batch_eval(args)
    grad = log_density_gradient(spec, samples)
    d = spec.dim
    b_l = np.real(np.sum(grad * np.conj(l.coeffs), axis=tuple(range(-d, 0))))
    stat = df_dl + fx * b_l
    return float(stat.mean()), float(stat.std(ddof=1) / math.sqrt(stat.size))


def dirichlet_form_estimate(spec: GibbsSpec, f: CylinderFunction,
                            g: CylinderFunction,
                            samples: np.ndarray) -> tuple[float, float]:
    """E(f, g) = 1/2 E<Df, Dg>: closed-form gradients, MC over samples."""
    args_f = _batch_args(f, samples, spec)
    args_g = _batch_args(g, samples, spec)
    pf = f.batch_partials(args_f)
    pg = g.batch_partials(args_g)
    gram = np.array([[inner_product(a, b) for b in g.ls] for a in f.ls])
    vals = np.zeros(samples.shape[0])
    for i in range(len(f.ls)):
        for j in range(len(g.ls)):
            vals += pf[i] * gram[i, j] * pg[j]
    vals *= 0.5
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(vals.size))


def poincare_estimate(spec: GibbsSpec, funcs: list[CylinderFunction],
                      samples: np.ndarray, n_boot: int = 200,
                      seed: int = 0) -> dict:
    """max over the dictionary of Var(f)/E(f,f) with a bootstrap interval.

    The ratio lower-bounds the best constant in the spectral-gap inequality;
    constant functions (zero gradient) are excluded.
    """
    rng = np.random.default_rng(seed)
    best = {"constant": 0.0, "name": None, "ci": (0.0, 0.0)}
    n = samples.shape[0]
    for f in funcs:
        args = _batch_args(f, samples, spec)
        vals = f.batch_eval(args)
        e_hat, _ = dirichlet_form_estimate(spec, f, f, samples)
        if e_hat < 1e-12:
            continue
        ratio = float(np.var(vals, ddof=1) / e_hat)
        if ratio > best["constant"]:
            boots = []
            pf = f.batch_partials(args)
            gram = np.array([[inner_product(a, b) for b in f.ls] for a in f.ls])
            dir_vals = 0.5 * sum(pf[i] * gram[i, j] * pf[j]
                                 for i in range(len(f.ls))
                                 for j in range(len(f.ls)))
            for _ in range(n_boot):
                idx = rng.integers(0, n, n)
                e_b = dir_vals[idx].mean()
                if e_b > 1e-12:
                    boots.append(float(np.var(vals[idx], ddof=1) / e_b))
            lo, hi = np.percentile(boots, [2.5, 97.5]) if boots else (0.0, 0.0)
            best = {"constant": ratio, "name": f.name, "ci": (float(lo), float(hi))}
    return best


def moment_bound_report(specs: list[GibbsSpec], sample_sets: list[np.ndarray],
                        n_pow: int, z: float) -> dict:
    """Per-size estimates of E |ext x|^{2n} in the (-z, inf, inf) norm.

    Returns the estimates with standard errors and the slope of estimate
    versus log N with a normal-theory confidence interval; a nonpositive
    upper slope bound is the uniformity signal.
    """
    idx = BesovIndex(-z)
    rows = []
    for spec, samples in zip(specs, sample_sets):
        norms = besov_norms_batch(samples, spec.dim, spec.n_modes, idx,
                                  oversample=2)
        vals = norms ** (2 * n_pow)
        rows.append({
            "n_modes": spec.n_modes,
            "estimate": float(vals.mean()),
            "se": float(vals.std(ddof=1) / math.sqrt(vals.size)),
            "n_samples": int(vals.size),
        })
    x = np.log([r["n_modes"] for r in rows])
    y = np.array([r["estimate"] for r in rows])
    w = np.array([r["se"] for r in rows])
    # weighted least squares slope with its standard error
    wgt = 1.0 / np.maximum(w, 1e-12) ** 2
    xb = np.sum(wgt * x) / np.sum(wgt)
    yb = np.sum(wgt * y) / np.sum(wgt)
    sxx = np.sum(wgt * (x - xb) ** 2)
    if sxx > 0:
        slope = float(np.sum(wgt * (x - xb) * (y - yb)) / sxx)
        slope_se = float(math.sqrt(1.0 / sxx))
    else:
        slope, slope_se = 0.0, math.inf
    return {"rows": rows, "slope": slope, "slope_se": slope_se,
            "z": z, "n_pow": n_pow}


def exponential_moment_probe(spec: GibbsSpec, samples: np.ndarray, z: float,
                             c: float = 0.1) -> tuple[float, float]:
    """E exp(c |x|_{B^{-z-0.1}_{2,2}}): finiteness probed, never proved."""
    idx = BesovIndex(-z - 0.1, 2, 2)
    norms = besov_norms_batch(samples, spec.dim, spec.n_modes, idx)
    vals = np.exp(c * norms)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(vals.size))


# ---------------------------------------------------------------------------
# energy-solution diagnostics


def energy_solution_diagnostics(records: list[TrajectoryRecord],
                                qv_h_refined: float | None = None) -> dict:
    """Stationarity, martingale quadratic variation, and reversed-path checks.

    records: trajectories from stationary starts sharing one config.
    Checks (per test function): (a) first-vs-last marginal second moments,
    (b) realized QV of the noise part against the band energy of phi times
    the horizon, (c) smallness of the drift functional's QV (pass its
    refined-step value to verify the decrease), (d) the same QV check along
    the time-reversed paths.
    """
    cfg = records[0].config
    labels = records[0].phi_labels
    n_phi = len(labels)
    from .fields import pad_box

    report = {"config_horizon": cfg.horizon, "checks": {}}
    pair0 = np.stack([r.pairing_path[0] for r in records])
    pair_t = np.stack([r.pairing_path[-1] for r in records])
    for i, lab in enumerate(labels):
        a, b = pair0[:, i] ** 2, pair_t[:, i] ** 2
        diff = a - b
        se = diff.std(ddof=1) / math.sqrt(diff.size)
        report["checks"][f"stationarity[{lab}]"] = {
            "estimate": float(diff.mean()), "se": float(se),
            "pass": bool(abs(diff.mean()) < 3 * se + 1e-12)}

    qv_m = np.stack([r.qv_m[-1] for r in records])
    qv_h = np.stack([r.qv_h[-1] for r in records])
    for i, lab in enumerate(labels):
        report["checks"][f"qv_m[{lab}]"] = {"estimate": float(qv_m[:, i].mean())}
        report["checks"][f"qv_h[{lab}]"] = {"estimate": float(qv_h[:, i].mean())}

    # reversed-path realized QV of the martingale part
    rev_qv = np.zeros((len(records), n_phi))
    for r_i, r in enumerate(records):
        pair = r.pairing_path
        dh = np.diff(r.h_path, axis=0)
        dlap = np.diff(r.lap_path, axis=0)
        # reversed increments: dM^_n = (pair[M-n-1]-pair[M-n]) - dlap[M-n-1]
        #                              + dh[M-n-1]
        d_pair_rev = pair[-2::-1] - pair[:0:-1]
        dm_rev = d_pair_rev - dlap[::-1] + dh[::-1]
        rev_qv[r_i] = np.sum(dm_rev**2, axis=0)
    for i, lab in enumerate(labels):
        report["checks"][f"qv_m_reversed[{lab}]"] = {
            "estimate": float(rev_qv[:, i].mean())}
    if qv_h_refined is not None:
        report["checks"]["qv_h_refinement"] = {
            "coarse": float(qv_h.mean()), "refined": float(qv_h_refined),
            "pass": bool(qv_h_refined < qv_h.mean())}
    return report
