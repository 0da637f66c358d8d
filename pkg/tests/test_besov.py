"""Dyadic partition, block norms, paraproducts, commutator, heat flow."""

import math

import numpy as np
import pytest

from phi4torus.besov import (
    BesovIndex,
    besov_norm,
    build_dyadic_partition,
    commutator_c,
    heat_flow,
    holder_time_norm,
    lp_block,
    mollifier_paraproduct_commutator,
    paraproduct_decompose,
    paraproduct_lt,
    resonant_product,
)
from phi4torus.bumps import mollifier_symbol
from phi4torus.fields import (
    FourierField,
    frequency_grid,
    l2_norm,
    pointwise_product,
    single_mode_field,
    to_fourier,
    zero_field,
)

CINF = math.inf


def random_field(dim, cutoff, seed=0, mean_zero=True):
    from phi4torus.fields import LatticeField

    rng = np.random.default_rng(seed)
    lat = LatticeField(dim, cutoff, rng.standard_normal((2 * cutoff + 1,) * dim))
    return to_fourier(lat, mean_zero=mean_zero)


def gaussian_regularity_field(dim, cutoff, reg, seed=0):
    """Random field whose coefficient decay gives Hoelder regularity ~ reg."""
    rng = np.random.default_rng(seed)
    shape = (2 * cutoff + 1,) * dim
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    k2 = np.sum(frequency_grid(dim, cutoff).astype(float) ** 2, axis=0)
    sd = np.where(k2 > 0, (k2 + 1e-300) ** (-(2 * reg + dim) / 4.0), 0.0)
    coeffs = z * sd
    coeffs = (coeffs + np.conj(np.flip(coeffs))) / np.sqrt(2)
    return FourierField(dim, cutoff, coeffs, mean_zero=True)


# ---------------------------------------------------------------------------
# partition


def test_partition_origin():
    part = build_dyadic_partition(8)
    assert part.chi(0.0) == 1.0
    for j in range(0, part.j_max + 1):
        assert part.theta(0.0 / 2**j) == 0.0


@pytest.mark.parametrize("cutoff", [1, 4, 16, 48])
def test_partition_of_unity_on_grid(cutoff):
    part = build_dyadic_partition(cutoff)
    radius = np.sqrt(np.sum(frequency_grid(3, cutoff).astype(float) ** 2, axis=0))
    total = part.chi(radius)
    for j in range(0, part.j_max + 1):
        total = total + part.theta(radius / 2**j)
    assert np.abs(total - 1.0).max() < 1e-12


def test_partition_support_disjointness():
    part = build_dyadic_partition(32)
    r = np.linspace(0, 64, 4001)
    blocks = [part.chi(r)] + [part.theta(r / 2**j) for j in range(part.j_max + 1)]
    for i in range(len(blocks)):
        for j in range(i + 2, len(blocks)):
            assert np.abs(blocks[i] * blocks[j]).max() == 0.0


def test_block_support_scan():
    # a mode with |k| ~ 2^j only meets blocks j-1, j, j+1
    part = build_dyadic_partition(32)
    u = single_mode_field(2, 32, (8, 0))  # |k| = 8 = 2^3
    active = [j for j in range(-1, part.j_max + 1)
              if np.abs(lp_block(u, j, part).coeffs).max() > 0]
    assert set(active).issubset({2, 3, 4})


# ---------------------------------------------------------------------------
# blocks


def test_lp_block_single_mode_multiplier():
    part = build_dyadic_partition(8)
    k = (3, 1)
    u = single_mode_field(2, 8, k)
    r = math.sqrt(10.0)
    for j in range(-1, part.j_max + 1):
        w = part.chi(r) if j == -1 else part.theta(r / 2**j)
        b = lp_block(u, j, part)
        assert np.abs(b.coeffs - w * u.coeffs).max() < 1e-12


@pytest.mark.parametrize("dim,cutoff", [(2, 9), (3, 5)])
def test_block_reconstruction(dim, cutoff):
    u = random_field(dim, cutoff, seed=3, mean_zero=False)
    part = build_dyadic_partition(cutoff)
    total = np.zeros_like(u.coeffs)
    for j in range(-1, part.j_max + 1):
        total += lp_block(u, j, part).coeffs
    assert np.abs(total - u.coeffs).max() < 1e-12


def test_block_index_out_of_range():
    u = random_field(2, 4)
    part = build_dyadic_partition(4)
    with pytest.raises(ValueError):
        lp_block(u, part.j_max + 1, part)


# ---------------------------------------------------------------------------
# norms


def test_besov_norm_zero_field():
    assert besov_norm(zero_field(2, 4), BesovIndex(0.5, 2, 2)) == 0.0


@pytest.mark.parametrize("alpha,p", [(-0.5, CINF), (0.3, 2), (1.0, 4)])
def test_besov_norm_constant_field(alpha, p):
    c = -1.7
    u = zero_field(3, 2, mean_zero=False)
    u.coeffs[2, 2, 2] = c * 2 ** (3 / 2)  # the constant function c
    val = besov_norm(u, BesovIndex(alpha, p, CINF))
    assert val == pytest.approx(2.0**-alpha * abs(c), rel=1e-9)


def test_besov_norm_single_mode_closed_form():
    k = (4, 0, 1)
    u = single_mode_field(3, 8, k)
    part = build_dyadic_partition(8)
    r = math.sqrt(17.0)
    # max over grid samples of |e_k + e_{-k}| = 2^{1 - d/2} (cos attains 1)
    sup = 2 ** (1 - 3 / 2)
    alpha = -0.7
    expected = max(
        [2.0**-alpha * part.chi(r) * sup]
        + [2.0 ** (j * alpha) * part.theta(r / 2**j) * sup
           for j in range(part.j_max + 1)]
    )
    val = besov_norm(u, BesovIndex(alpha), part)
    assert val == pytest.approx(expected, rel=1e-6)


def test_besov_norm_homogeneous():
    u = random_field(2, 6, seed=5)
    idx = BesovIndex(-0.4, CINF, CINF)
    assert besov_norm(u.scaled(3.5), idx) == pytest.approx(3.5 * besov_norm(u, idx), rel=1e-10)


def test_besov_norm_alpha_monotone_above_low_block():
    # fields with no low-block content: weights 2^{j alpha} increase with alpha
    u = single_mode_field(2, 16, (9, 2)) + random_field(2, 16, seed=7).scaled(0.0)
    u = FourierField(2, 16, u.coeffs, mean_zero=True)
    part = build_dyadic_partition(16)
    assert np.abs(lp_block(u, -1, part).coeffs).max() == 0.0
    norms = [besov_norm(u, BesovIndex(a), part) for a in (-1.0, -0.3, 0.2, 0.9)]
    assert all(n2 >= n1 for n1, n2 in zip(norms, norms[1:]))


def test_l2_norm_equivalence_across_sizes():
    idx = BesovIndex(0.0, 2, 2)
    ratios = []
    for n in (4, 8, 16):
        u = random_field(3, n, seed=n)
        ratios.append(besov_norm(u, idx) / l2_norm(u))
    assert max(ratios) / min(ratios) < 1.2
    assert all(2.0 ** (-3 / 2) / 2 < r <= 2.0 ** (-3 / 2) + 1e-9 for r in ratios)


def test_besov_embedding_probe():
    # |u|_{B^{alpha - d(1/p1 - 1/p2)}_{p2,q}} <= c |u|_{B^alpha_{p1,q}}
    alpha, p1, p2, d = 0.5, 2, CINF, 2
    target = alpha - d * (1 / p1 - 0.0)
    worst = 0.0
    for n in (4, 8, 16):
        u = random_field(2, n, seed=n + 1)
        lhs = besov_norm(u, BesovIndex(target, p2, CINF))
        rhs = besov_norm(u, BesovIndex(alpha, p1, CINF))
        worst = max(worst, lhs / rhs)
    assert worst < 5.0


# ---------------------------------------------------------------------------
# paraproducts


def test_paraproduct_zero_inputs():
    f = zero_field(2, 4)
    g = random_field(2, 4, seed=1)
    for part in paraproduct_decompose(f, g):
        assert np.abs(part.coeffs).max() == 0.0


@pytest.mark.parametrize("dim,nf,ng", [(2, 5, 7), (3, 3, 4)])
def test_paraproduct_sum_identity(dim, nf, ng):
    f = random_field(dim, nf, seed=2)
    g = random_field(dim, ng, seed=3)
    lo, res, hi = paraproduct_decompose(f, g)
    total = lo.coeffs + res.coeffs + hi.coeffs
    prod = pointwise_product(f, g)
    scale = np.abs(prod.coeffs).max()
    assert np.abs(total - prod.coeffs).max() < 1e-10 * scale


def test_paraproduct_swap_symmetry():
    f = random_field(2, 4, seed=4)
    g = random_field(2, 6, seed=5)
    lo_fg, res_fg, hi_fg = paraproduct_decompose(f, g)
    lo_gf, res_gf, hi_gf = paraproduct_decompose(g, f)
    assert np.abs(lo_fg.coeffs - hi_gf.coeffs).max() < 1e-12
    assert np.abs(res_fg.coeffs - res_gf.coeffs).max() < 1e-12


def test_low_high_lands_in_lt():
    # f a low mode, g a high mode: product sits in pi_<(f, g) entirely
    f = single_mode_field(2, 1, (1, 0))
    g = single_mode_field(2, 32, (0, 32))
    lo, res, hi = paraproduct_decompose(f, g)
    prod = pointwise_product(f, g)
    assert np.abs(lo.coeffs - prod.coeffs).max() < 1e-12
    assert np.abs(res.coeffs).max() < 1e-14
    assert np.abs(hi.coeffs).max() < 1e-14


def test_paraproduct_headroom_error():
    f = random_field(2, 4, seed=6)
    g = random_field(2, 4, seed=7)
    with pytest.raises(ValueError):
        paraproduct_decompose(f, g, working_cutoff=6)


# ---------------------------------------------------------------------------
# commutator


def test_commutator_zero_inputs():
    f = zero_field(2, 4)
    g = random_field(2, 4, seed=1)
    h = random_field(2, 4, seed=2)
    assert np.abs(commutator_c(f, g, h).coeffs).max() == 0.0
    assert np.abs(commutator_c(g, f, h).coeffs).max() == 0.0
    assert np.abs(commutator_c(g, h, f).coeffs).max() == 0.0


def test_commutator_bound_ratio_stable():
    alpha, beta, gamma = 0.4, -0.6, -0.6
    ratios = []
    for n in (4, 8, 16):
        vals = []
        for seed in range(3):
            f = gaussian_regularity_field(2, n, alpha, seed=10 + seed)
            g = gaussian_regularity_field(2, n, beta, seed=20 + seed)
            h = gaussian_regularity_field(2, n, gamma, seed=30 + seed)
            c = commutator_c(f, g, h)
            num = besov_norm(c, BesovIndex(alpha + beta + gamma), oversample=2)
            den = (besov_norm(f, BesovIndex(alpha))
                   * besov_norm(g, BesovIndex(beta))
                   * besov_norm(h, BesovIndex(gamma)))
            vals.append(num / den)
        ratios.append(np.median(vals))
    # boundedness, not a specific constant: no growth trend across scales
    assert ratios[2] < 4.0 * max(ratios[0], 1e-12)


# ---------------------------------------------------------------------------
# heat flow


def test_heat_flow_identity_at_zero():
    u = random_field(2, 5, seed=8)
    assert heat_flow(u, 0.0) is u


def test_heat_flow_rejects_negative_time():
    with pytest.raises(ValueError):
        heat_flow(random_field(2, 3), -0.1)


def test_heat_flow_single_mode_multiplier():
    k = (2, 1)
    u = single_mode_field(2, 4, k)
    t = 0.3
    v = heat_flow(u, t)
    assert v.coeff(k) == pytest.approx(math.exp(-math.pi**2 * 5 * t), rel=1e-12)


def test_heat_flow_besov_contraction():
    u = random_field(2, 8, seed=9)
    idx = BesovIndex(-0.3)
    n0 = besov_norm(u, idx)
    prev = n0
    for t in (0.01, 0.1, 1.0):
        cur = besov_norm(heat_flow(u, t), idx)
        assert cur <= prev + 1e-12
        prev = cur


def test_heat_flow_smoothing_ratio_bounded():
    # |P_t u|_{alpha + delta} t^{delta/2} / |u|_alpha bounded over two decades
    delta = 1.0
    alpha = -1.5
    u = gaussian_regularity_field(3, 8, -1.55, seed=42)  # white-noise-like
    base = besov_norm(u, BesovIndex(alpha), oversample=2)
    ratios = []
    for t in np.geomspace(1e-4, 1.0, 9):
        sm = besov_norm(heat_flow(u, t), BesovIndex(alpha + delta), oversample=2)
        ratios.append(sm * t ** (delta / 2) / base)
    assert max(ratios) < 10.0 * min(max(ratios[0], 1e-12), 10.0)


def test_heat_flow_difference_bound_probe():
    # |(P_t - I) u|_alpha <~ t^{delta/2} |u|_{alpha+delta}
    delta = 1.0
    alpha = -0.5
    u = gaussian_regularity_field(2, 16, 0.45, seed=3)
    rhs = besov_norm(u, BesovIndex(alpha + delta))
    ratios = []
    for t in np.geomspace(1e-4, 1e-1, 7):
        diff = heat_flow(u, t) - u
        ratios.append(besov_norm(diff, BesovIndex(alpha)) / (t ** (delta / 2) * rhs))
    assert max(ratios) < 10.0


def test_mollifier_commutator_bounded_probe():
    u = gaussian_regularity_field(2, 12, 0.4, seed=1)
    v = gaussian_regularity_field(2, 12, -0.6, seed=2)
    vals = []
    for eps in (0.5, 0.25, 0.125):
        c = mollifier_paraproduct_commutator(u, v, eps, mollifier_symbol)
        vals.append(besov_norm(c, BesovIndex(-0.2), oversample=2))
    assert max(vals) < 50 * max(min(vals), 1e-12)


def test_holder_time_norm_linear_path():
    # u(t) = t * v: the quotient (t-s)^{7/8} |v| is maximized at the full gap
    v = random_field(2, 3, seed=11)
    times = [0.0, 0.25, 0.5, 1.0]
    fields = [v.scaled(t) for t in times]
    idx = BesovIndex(0.0)
    val = holder_time_norm(fields, times, 0.125, idx)
    base = besov_norm(v, idx)
    assert val == pytest.approx(base * 1.0**0.875, rel=1e-9)
