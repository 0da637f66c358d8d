"""Exponential-Euler dynamics: drift exactness, invariant laws, accumulators."""

import math

import numpy as np
import pytest

from phi4torus.dynamics import (
    SimConfig,
    SimulationUnstableError,
    drift_eval,
    etd_step,
    extract_remainder,
    refinement_distance,
    simulate,
    stationary_initial,
)
from phi4torus.fields import (
    FourierField,
    LatticeField,
    RegularityParams,
    ext,
    ext_inverse,
    inner_product,
    single_mode_field,
    symbol_box,
    to_fourier,
    zero_field,
)
from phi4torus.noise import ModeDriver
from phi4torus.renorm import RenormConstants, counterterms_for


def config(**kw):
    base = dict(dim=3, n_modes=2, delta=1e-3, horizon=0.02, m=1.0, lam=0.1,
                seed=7, counterterm_source="lattice")
    base.update(kw)
    return SimConfig(**base)


def random_state(cfg, seed=0):
    rng = np.random.default_rng(seed)
    lat = LatticeField(cfg.dim, cfg.band,
                       rng.standard_normal((2 * cfg.band + 1,) * cfg.dim))
    return to_fourier(lat, mean_zero=cfg.mean_zero)


# ---------------------------------------------------------------------------
# drift


def test_drift_zero_state():
    cfg = config()
    d = drift_eval(zero_field(3, 2), cfg.constants(), "lattice")
    assert np.abs(d.coeffs).max() == 0.0


def test_drift_single_site_impulse():
    # lam = 1, m = 0, counterterms off: drift at the site is -value^3
    cfg = config(lam=1.0, m=0.0, counterterm_source="none", mean_zero=False)
    vals = np.zeros((5, 5, 5))
    vals[2, 2, 2] = 1.7  # site at the origin
    state = ext(LatticeField(3, 2, vals))
    d = drift_eval(state, cfg.constants(), "lattice")
    drift_vals = ext_inverse(d).values
    assert drift_vals[2, 2, 2] == pytest.approx(-1.7**3, rel=1e-10)


def test_drift_matches_lattice_sitewise_oracle():
    # Fourier-side drift equals the sitewise lattice drift after ext
    cfg = config(lam=1.0, mean_zero=False)
    consts = cfg.constants()
    state = random_state(cfg, seed=3)
    d = drift_eval(state, consts, "lattice")
    lat = ext_inverse(state)
    sitewise = (-consts.lam * lat.values**3
                + consts.mass_coefficient() * lat.values)
    oracle = ext(LatticeField(3, cfg.band, sitewise))
    scale = max(np.abs(oracle.coeffs).max(), 1.0)
    assert np.abs(d.coeffs - oracle.coeffs).max() / scale < 1e-10


def test_drift_mollified_variant_galerkin_projection():
    cfg = config(variant="mollified", counterterm_source="mollified")
    state = random_state(cfg, seed=4)
    d = drift_eval(state, cfg.constants(), "mollified")
    assert d.cutoff == state.cutoff
    assert d.is_hermitian(1e-9)


# ---------------------------------------------------------------------------
# integrator


def test_etd_zero_everything_stays_zero():
    cfg = config(counterterm_source="none", lam=0.0)
    consts = cfg.constants()
    driver = ModeDriver(cfg.seed, cfg.dim, cfg.band)
    state = zero_field(3, cfg.band)
    # zero noise: subtract the injected increment to isolate the map
    new, eta = etd_step(state, cfg, consts, driver, 0)
    recovered = FourierField(3, cfg.band, new.coeffs - eta.coeffs,
                             mean_zero=True)
    assert np.abs(recovered.coeffs).max() == 0.0


def test_etd_linear_invariant_law():
    # lam = 0, m > 0: mode variances 1/(2(lambda_k + m)) preserved exactly
    cfg = config(lam=0.0, m=0.8, counterterm_source="none", delta=0.02,
                 horizon=0.02, n_modes=2)
    consts = cfg.constants()
    n_members = 4000
    k_probe = [(1, 0, 0), (2, 1, 0), (0, 0, 2)]
    sym = symbol_box(3, cfg.band, cfg.eps, cfg.symbol_kind, mass=cfg.m)
    acc = {k: [] for k in k_probe}
    for member in range(n_members):
        driver = ModeDriver(cfg.seed, cfg.dim, cfg.band, member)
        state = stationary_initial(cfg, driver)
        for step in range(3):
            state, _ = etd_step(state, cfg, consts, driver, step)
        for k in k_probe:
            acc[k].append(abs(state.coeff(k)) ** 2)
    for k in k_probe:
        lam_k = sym[tuple(np.array(k) + cfg.band)]
        target = 1.0 / (2 * lam_k)
        se = target * math.sqrt(2.0 / n_members)
        assert abs(np.mean(acc[k]) - target) < 3.5 * se


def test_etd_deterministic_order_against_reference():
    # noise off, single-mode initial data: first-order accuracy in delta
    m, lam_c = 1.0, 1.0
    consts = RenormConstants(0.0, 0.0, m, lam_c, mesh_size_eps := 0.4)
    k = (1, 0, 0)

    def run(delta, steps):
        cfg = SimConfig(dim=3, n_modes=1, delta=delta, horizon=delta * steps,
                        m=m, lam=lam_c, counterterm_source="none",
                        instability_ceiling=1e9)
        state = single_mode_field(3, 1, k, amplitude=0.8)
        consts_l = cfg.constants()
        driver = ModeDriver(0, 3, cfg.band)
        plan = None
        for step in range(steps):
            drift = drift_eval(state, consts_l, "lattice", include_mass=False)
            sym = symbol_box(3, cfg.band, cfg.eps, "lattice", mass=m)
            from phi4torus.noise import transition_decay

            decay = transition_decay(sym, delta)
            with np.errstate(divide="ignore", invalid="ignore"):
                w = np.where(sym > 1e-12, (1 - decay) / np.where(sym > 1e-12,
                                                                 sym, 1.0), delta)
            state = FourierField(3, cfg.band,
                                 decay * state.coeffs + w * drift.coeffs,
                                 mean_zero=True)
        return state

    t_end = 0.2
    ref = run(1e-5, round(t_end / 1e-5)).coeff(k).real
    errs = [abs(run(d, round(t_end / d)).coeff(k).real - ref)
            for d in (0.02, 0.01, 0.005)]
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert min(orders) >= 0.9


def test_instability_detector():
    cfg = config(instability_ceiling=1e-6, counterterm_source="none")
    state = random_state(cfg, seed=1)
    with pytest.raises(SimulationUnstableError):
        etd_step(state, cfg, cfg.constants(), ModeDriver(0, 3, cfg.band), 0)


# ---------------------------------------------------------------------------
# simulate + accumulators


def probe_functions(cfg):
    return [
        ("cos100", single_mode_field(cfg.dim, cfg.band, (1, 0, 0),
                                     amplitude=1 / math.sqrt(2))),
        ("cos110", single_mode_field(cfg.dim, cfg.band, (1, 1, 0),
                                     amplitude=1 / math.sqrt(2))),
    ]


def test_simulate_zero_horizon_single_snapshot():
    cfg = config(horizon=1e-3, delta=1e-3)
    driver = ModeDriver(cfg.seed, cfg.dim, cfg.band)
    state = stationary_initial(cfg, driver)
    rec = simulate(cfg, state, driver, probe_functions(cfg))
    assert rec.times[0] == 0.0
    assert rec.h_path.shape[0] == 2


def test_out_of_band_test_function_m_zero():
    cfg = config(n_modes=1, horizon=0.01)
    driver = ModeDriver(cfg.seed, cfg.dim, cfg.band)
    state = stationary_initial(cfg, driver)
    phi_out = single_mode_field(3, 3, (3, 0, 0))
    rec = simulate(cfg, state, driver, [("out", phi_out)])
    assert np.abs(rec.m_path).max() == 0.0


def test_accumulator_identity_residual_first_order():
    cfg_base = dict(dim=3, n_modes=2, horizon=0.05, m=1.0, lam=1.0, seed=3,
                    counterterm_source="lattice")
    residuals = {}
    for delta in (2e-3, 5e-4):
        cfg = SimConfig(delta=delta, **cfg_base)
        driver = ModeDriver(cfg.seed, cfg.dim, cfg.band)
        state = stationary_initial(cfg, driver)
        rec = simulate(cfg, state, driver, probe_functions(cfg))
        residuals[delta] = np.abs(rec.identity_residual()).max()
    # O(delta): quartering the step shrinks the residual ~4x
    ratio = residuals[2e-3] / residuals[5e-4]
    assert ratio > 2.0
    assert residuals[5e-4] < 0.05


def test_qv_m_matches_band_energy():
    cfg = config(n_modes=2, delta=2e-4, horizon=0.1, lam=0.0, m=1.0,
                 counterterm_source="none")
    driver = ModeDriver(11, cfg.dim, cfg.band)
    state = stationary_initial(cfg, driver)
    phis = probe_functions(cfg)
    rec = simulate(cfg, state, driver, phis)
    for i, (_, phi) in enumerate(phis):
        target = inner_product(phi, phi) * cfg.horizon
        qv = rec.qv_m[-1, i]
        # realized QV of the injected noise: sd ~ sqrt(2/steps)
        assert abs(qv / target - 1.0) < 4 * math.sqrt(2.0 / cfg.n_steps())


def test_qv_h_vanishes_with_delta():
    vals = {}
    for delta in (1e-3, 2.5e-4):
        cfg = config(n_modes=2, delta=delta, horizon=0.05, lam=1.0, m=1.0)
        driver = ModeDriver(5, cfg.dim, cfg.band)
        state = stationary_initial(cfg, driver)
        rec = simulate(cfg, state, driver, probe_functions(cfg))
        vals[delta] = rec.qv_h[-1].max() / max(rec.qv_m[-1].max(), 1e-300)
    assert vals[2.5e-4] < vals[1e-3]
    assert vals[1e-3] < 0.01


def test_bit_reproducibility():
    cfg = config(horizon=0.01)
    driver = ModeDriver(cfg.seed, cfg.dim, cfg.band)
    s0 = stationary_initial(cfg, driver)
    rec1 = simulate(cfg, s0, driver, probe_functions(cfg))
    rec2 = simulate(cfg, s0, ModeDriver(cfg.seed, cfg.dim, cfg.band),
                    probe_functions(cfg))
    assert np.array_equal(rec1.snapshots[-1].coeffs, rec2.snapshots[-1].coeffs)
    assert np.array_equal(rec1.m_path, rec2.m_path)


# ---------------------------------------------------------------------------
# remainder extraction


def test_remainder_initial_condition():
    cfg = config(variant="lattice", horizon=0.02, delta=1e-3, record_stride=10)
    driver = ModeDriver(cfg.seed, cfg.dim, cfg.band)
    x0 = stationary_initial(cfg, driver)
    rec = simulate(cfg, x0, driver, [])
    times, phi3, phi1 = extract_remainder(rec, driver)
    assert times[0] == 0.0
    expect = x0.coeffs - phi1[0].coeffs
    assert np.abs(phi3[0].coeffs - expect).max() < 1e-12


def test_remainder_linear_case_is_heat_flow_of_initial_gap():
    # lam = 0, counterterms none, m = 0: x(t) - x1(t) = decay * (x0 - x1(0))
    cfg = config(lam=0.0, m=0.0, counterterm_source="none", horizon=0.02,
                 delta=1e-3, record_stride=20)
    driver = ModeDriver(9, cfg.dim, cfg.band)
    x0 = random_state(cfg, seed=2)
    rec = simulate(cfg, x0, driver, [])
    times, phi3, phi1 = extract_remainder(rec, driver)
    sym = symbol_box(3, cfg.band, cfg.eps, cfg.symbol_kind)
    for t, p3 in zip(times, phi3):
        expected = np.exp(-sym * t) * (x0.coeffs - phi1[0].coeffs)
        expected[(cfg.band,) * 3] = 0.0
        assert np.abs(p3.coeffs - expected).max() < 1e-9


def test_remainder_driver_mismatch():
    cfg = config(horizon=0.01)
    driver = ModeDriver(cfg.seed, cfg.dim, cfg.band)
    rec = simulate(cfg, stationary_initial(cfg, driver), driver, [])
    with pytest.raises(ValueError):
        extract_remainder(rec, ModeDriver(cfg.seed + 1, cfg.dim, cfg.band))


# ---------------------------------------------------------------------------
# refinement coupling


def test_refinement_same_size_zero_distance():
    cfg = config(horizon=0.01, delta=1e-3)
    times, dists = refinement_distance(cfg, cfg, seed=3)
    assert max(dists) < 1e-12


def test_refinement_linear_case_equals_tail_norm():
    # lam = 0 with the continuum symbol: shared modes cancel exactly, the
    # distance is the tail-mode norm of the finer run
    kw = dict(dim=3, delta=1e-3, horizon=0.02, m=1.0, lam=0.0,
              counterterm_source="none", variant="galerkin", record_stride=10)
    coarse = SimConfig(n_modes=2, **kw)
    fine = SimConfig(n_modes=4, **kw)
    master = ModeDriver(21, 3, fine.band)
    ic = stationary_initial(coarse, master)
    fi = stationary_initial(fine, master)
    rec_c = simulate(coarse, ic, master)
    rec_f = simulate(fine, fi, master)
    from phi4torus.besov import BesovIndex, besov_norm
    from phi4torus.fields import pad_box, project_pn

    times, dists = refinement_distance(coarse, fine, seed=21,
                                       initial_coarse=ic, initial_fine=fi)
    # oracle: tail = fine minus its own low-band projection
    for t, snap_f, dist in zip(rec_f.times, rec_f.snapshots, dists):
        low = pad_box(project_pn(snap_f, coarse.band).coeffs, coarse.band,
                      fine.band, 3)
        tail = FourierField(3, fine.band, snap_f.coeffs - low, mean_zero=True)
        oracle = besov_norm(tail, BesovIndex(-coarse.params.z), oversample=2)
        assert dist == pytest.approx(oracle, rel=1e-9)


def test_refinement_rejects_non_nested():
    big = config(n_modes=4)
    small = config(n_modes=2)
    with pytest.raises(ValueError):
        refinement_distance(big, small, seed=0)


@pytest.mark.slow
def test_remainder_regularity_ladder():
    # the linear part's 0.4-norm grows with the band; the remainder's stays
    from phi4torus.besov import BesovIndex, besov_norm

    idx = BesovIndex(0.4)
    med = {}
    for n in (4, 8):
        vals1, vals3 = [], []
        for member in range(6):
            cfg = config(n_modes=n, variant="galerkin",
                         counterterm_source="galerkin", lam=0.5, m=1.0,
                         delta=2e-3, horizon=0.1, record_stride=50,
                         seed=500)
            driver = ModeDriver(cfg.seed, cfg.dim, cfg.band, member)
            x0 = stationary_initial(cfg, driver)
            rec = simulate(cfg, x0, driver, [])
            times, phi3, phi1 = extract_remainder(rec, driver)
            vals1.append(besov_norm(phi1[-1], idx, oversample=2))
            vals3.append(besov_norm(phi3[-1], idx, oversample=2))
        med[n] = (np.median(vals1), np.median(vals3))
    growth1 = med[8][0] / med[4][0]
    growth3 = med[8][1] / med[4][1]
    assert growth1 > 1.5          # rough linear field: ~ N^0.9
    assert growth3 < 1.35         # remainder stays put
    assert med[8][1] < med[8][0]  # and is smaller outright
