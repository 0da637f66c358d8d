"""Field representations on the d-torus and its odd lattice, with fast transforms.

The torus is [-1, 1]^d.  Frequencies are integer vectors k with |k|_inf <= M
("the box"), and the character basis is

    e_k(xi) = 2^(-d/2) exp(i pi k . xi),

orthonormal in L^2([-1,1]^d).  The lattice has (2N+1)^d sites xi = eps * j,
j in {-N..N}^d, mesh eps = 2/(2N+1), and carries the inner product
<f, g>_eps = sum_xi eps^d f(xi) g(xi).  Restricted to |k|_inf <= N the
characters are an orthonormal basis of the lattice space, so the band-limited
interpolant (``ext``) is an isometry onto the degree-N trigonometric
polynomials.

Coefficient arrays are dense boxes of shape (2M+1,)*d indexed by shifted
frequency, i.e. ``coeffs[i] <-> k = i - M`` per axis.  Real-valued fields have
Hermitian coefficient symmetry coeff(-k) = conj(coeff(k)).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "FourierField",
    "LatticeField",
    "RegularityParams",
    "validate_parameters",
    "mesh_size",
    "frequency_grid",
    "laplacian_symbol",
    "symbol_box",
    "ext",
    "ext_inverse",
    "to_fourier",
    "to_lattice",
    "evaluate_on_grid",
    "field_from_grid",
    "project_pn",
    "alias_fold",
    "q_n",
    "pointwise_product",
    "pointwise_power",
    "inner_product",
    "l2_norm",
    "lp_lattice_norm",
    "zero_field",
    "single_mode_field",
]


HERMITIAN_TOL = 1e-10


def mesh_size(n_modes: int) -> float:
    """Lattice mesh eps = 2/(2N+1) for the (2N+1)^d-site grid."""
    return 2.0 / (2 * n_modes + 1)


@dataclass(frozen=True)
class FourierField:
    """Complex coefficients on the frequency box {|k|_inf <= cutoff}.

    Invariants: Hermitian symmetry (the field is real-valued), and a zero
    k = 0 coefficient when ``mean_zero`` is set.
    """

    dim: int
    cutoff: int
    coeffs: np.ndarray
    mean_zero: bool = True

    def __post_init__(self):
        expected = (2 * self.cutoff + 1,) * self.dim
        if self.coeffs.shape != expected:
            raise ValueError(
                f"coefficient box shape {self.coeffs.shape} != {expected}"
            )

    @property
    def n_modes(self) -> int:
        return self.cutoff

    def coeff(self, k) -> complex:
        """Coefficient of e_k; zero outside the box."""
        idx = tuple(int(ki) + self.cutoff for ki in k)
        if any(i < 0 or i >= 2 * self.cutoff + 1 for i in idx):
            return 0.0 + 0.0j
        return complex(self.coeffs[idx])

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return bool(np.abs(np.flip(self.coeffs) - np.conj(self.coeffs)).max() <= tol)

    def check_hermitian(self, tol: float = HERMITIAN_TOL) -> None:
        if not self.is_hermitian(tol):
            raise ValueError("coefficients are not Hermitian-symmetric")

    def scaled(self, a: float) -> "FourierField":
        return replace(self, coeffs=a * self.coeffs)

    def __add__(self, other: "FourierField") -> "FourierField":
        a, b = pad_to_common(self, other)
        return replace(a, coeffs=a.coeffs + b.coeffs,
                       mean_zero=a.mean_zero and b.mean_zero)

    def __sub__(self, other: "FourierField") -> "FourierField":
        a, b = pad_to_common(self, other)
        return replace(a, coeffs=a.coeffs - b.coeffs,
                       mean_zero=a.mean_zero and b.mean_zero)


@dataclass(frozen=True)
class LatticeField:
    """Real values on the (2N+1)^d-site grid; ``values[m] <-> j = m - N``."""

    dim: int
    n_modes: int
    values: np.ndarray

    def __post_init__(self):
        expected = (2 * self.n_modes + 1,) * self.dim
        if self.values.shape != expected:
            raise ValueError(f"lattice shape {self.values.shape} != {expected}")

    @property
    def eps(self) -> float:
        return mesh_size(self.n_modes)

    def sites(self) -> np.ndarray:
        """Site coordinate grid, shape (dim,) + lattice shape."""
        j = np.arange(-self.n_modes, self.n_modes + 1)
        grids = np.meshgrid(*([j] * self.dim), indexing="ij")
        return self.eps * np.stack(grids)


@dataclass(frozen=True)
class RegularityParams:
    """The (z, kappa, gamma) triple steering every regularity-indexed norm."""

    z: float = 0.55
    kappa: float = 0.004
    gamma: float = 0.10


#: Violation labels, phrased exactly as reported by the CLI.
_PARAM_CHECKS = (
    ("z ∈ (1/2, 2/3)", lambda p: 0.5 < p.z < 2.0 / 3.0),
    ("z − 1/2 > 2κ", lambda p: p.z - 0.5 > 2 * p.kappa),
    ("6κ < γ", lambda p: 6 * p.kappa < p.gamma),
    ("10κ+3γ < 2−3z", lambda p: 10 * p.kappa + 3 * p.gamma < 2 - 3 * p.z),
)


def validate_parameters(params: RegularityParams) -> list[str]:
    """Return the list of violated inequalities (empty means valid)."""
    violations = []
    if not (params.z > 0 and params.kappa > 0 and params.gamma > 0):
        violations.append("z, κ, γ > 0")
    violations.extend(name for name, ok in _PARAM_CHECKS if not ok(params))
    return violations


# ---------------------------------------------------------------------------
# transforms


def _centered_fft(vals: np.ndarray, dim: int) -> np.ndarray:
    axes = tuple(range(-dim, 0))
    return np.fft.fftshift(
        np.fft.fftn(np.fft.ifftshift(vals, axes=axes), axes=axes), axes=axes
    )


def _centered_ifft(coeffs: np.ndarray, dim: int) -> np.ndarray:
    axes = tuple(range(-dim, 0))
    return np.fft.fftshift(
        np.fft.ifftn(np.fft.ifftshift(coeffs, axes=axes), axes=axes), axes=axes
    )


def grid_forward(vals: np.ndarray, dim: int) -> np.ndarray:
    """Coefficient box of samples on a (2L+1)^d grid (batch axes allowed).

    c_k = eps^d 2^(-d/2) sum_j f(eps j) e^(-2 pi i k.j/(2L+1)); Parseval holds
    with the eps^d-weighted lattice norm.
    """
    n = vals.shape[-1]
    eps = 2.0 / n
    return (eps**dim) * 2 ** (-dim / 2) * _centered_fft(vals, dim)


def grid_inverse(coeffs: np.ndarray, dim: int) -> np.ndarray:
    """Field samples at the grid matching the coefficient box (complex)."""
    n = coeffs.shape[-1]
    return 2 ** (-dim / 2) * n**dim * _centered_ifft(coeffs, dim)


def to_fourier(lat: LatticeField, mean_zero: bool = False) -> FourierField:
    """Transform lattice values to coefficients on the box {|k|_inf <= N}."""
    coeffs = grid_forward(lat.values.astype(float), lat.dim)
    if mean_zero:
        coeffs[(lat.n_modes,) * lat.dim] = 0.0
    return FourierField(lat.dim, lat.n_modes, coeffs, mean_zero=mean_zero)


def to_lattice(field: FourierField, check: bool = True) -> LatticeField:
    """Inverse transform; requires Hermitian input (the result is real)."""
    if check:
        field.check_hermitian()
    vals = grid_inverse(field.coeffs, field.dim)
    return LatticeField(field.dim, field.cutoff, vals.real)


def ext(lat: LatticeField, mean_zero: bool = False) -> FourierField:
    """Band-limited interpolant of a lattice field.

    The returned degree-N trigonometric polynomial agrees with the input at
    every lattice site and has the same L^2 norm (the transform is the
    isometry onto the band).
    """
    return to_fourier(lat, mean_zero=mean_zero)


def ext_inverse(field: FourierField) -> LatticeField:
    """Restriction to the lattice sites of the field's own band."""
    return to_lattice(field)


def evaluate_on_grid(field: FourierField, grid_cutoff: int) -> np.ndarray:
    """Sample the field on the (2L+1)^d grid, L >= cutoff (exact, real)."""
    if grid_cutoff < field.cutoff:
        raise ValueError("evaluation grid coarser than the field band")
    padded = pad_box(field.coeffs, field.cutoff, grid_cutoff, field.dim)
    return grid_inverse(padded, field.dim).real


def field_from_grid(vals: np.ndarray, dim: int, mean_zero: bool = False) -> FourierField:
    """Forward transform of samples on an odd (2L+1)^d grid."""
    cutoff = (vals.shape[-1] - 1) // 2
    coeffs = grid_forward(vals, dim)
    if mean_zero:
        coeffs[(cutoff,) * dim] = 0.0
    return FourierField(dim, cutoff, coeffs, mean_zero=mean_zero)


def pad_box(coeffs: np.ndarray, cutoff: int, new_cutoff: int, dim: int) -> np.ndarray:
    """Embed a coefficient box into a larger one (zero outside)."""
    if new_cutoff == cutoff:
        return coeffs.copy()
    if new_cutoff < cutoff:
        raise ValueError("pad target smaller than source box")
    out = np.zeros(coeffs.shape[:-dim] + (2 * new_cutoff + 1,) * dim, dtype=complex)
    sl = (Ellipsis,) + (slice(new_cutoff - cutoff, new_cutoff + cutoff + 1),) * dim
    out[sl] = coeffs
    return out


def pad_to_common(a: FourierField, b: FourierField) -> tuple[FourierField, FourierField]:
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    m = max(a.cutoff, b.cutoff)
    return (
        replace(a, cutoff=m, coeffs=pad_box(a.coeffs, a.cutoff, m, a.dim)),
        replace(b, cutoff=m, coeffs=pad_box(b.coeffs, b.cutoff, m, b.dim)),
    )


# ---------------------------------------------------------------------------
# symbols


def frequency_grid(dim: int, cutoff: int) -> np.ndarray:
    """Integer frequency coordinates, shape (dim,) + box shape."""
    k = np.arange(-cutoff, cutoff + 1)
    return np.stack(np.meshgrid(*([k] * dim), indexing="ij"))


def laplacian_symbol(k, eps: float, kind: str = "continuum"):
    """Nonnegative symbol of -Laplacian at integer frequency k.

    kind "continuum": pi^2 |k|^2 (the torus Laplacian on e_k).
    kind "lattice":   (4/eps^2) sum_j sin^2(eps k^j pi / 2), the
    nearest-neighbour finite-difference dispersion; it is periodic in each
    k^j with period 2/eps and converges to the continuum symbol as eps -> 0.
    """
    k = np.asarray(k, dtype=float)
    if kind == "continuum":
        return np.pi**2 * np.sum(k**2, axis=0)
    if kind == "lattice":
        return (4.0 / eps**2) * np.sum(np.sin(eps * k * np.pi / 2.0) ** 2, axis=0)
    raise ValueError(f"unknown symbol kind {kind!r}")


def symbol_box(dim: int, cutoff: int, eps: float, kind: str = "continuum",
               mass: float = 0.0) -> np.ndarray:
    """Laplacian symbol plus mass on the whole frequency box."""
    return laplacian_symbol(frequency_grid(dim, cutoff), eps, kind) + mass


# ---------------------------------------------------------------------------
# projections and aliasing


def project_pn(field: FourierField, n: int) -> FourierField:
    """Sharp frequency projection onto {|k|_inf <= n}."""
    if n >= field.cutoff:
        return replace(field, cutoff=n,
                       coeffs=pad_box(field.coeffs, field.cutoff, n, field.dim))
    m = field.cutoff
    sl = (slice(m - n, m + n + 1),) * field.dim
    return replace(field, cutoff=n, coeffs=field.coeffs[sl].copy())


def _fold(field: FourierField, n: int, keep_inband: bool) -> FourierField:
    m, d = field.cutoff, field.dim
    if m > 3 * n:
        raise ValueError(
            f"aliasing fold needs support inside |k|_inf <= 3N = {3*n}, got {m}"
        )
    k = frequency_grid(d, m).reshape(d, -1)
    period = 2 * n + 1
    folded = k.copy()
    folded[k > n] -= period
    folded[k < -n] += period
    inband = np.all(np.abs(k) <= n, axis=0)
    src = field.coeffs.reshape(-1)
    out = np.zeros((period,) * d, dtype=complex)
    take = np.ones_like(inband) if keep_inband else ~inband
    flat = np.ravel_multi_index(tuple(folded[:, take] + n), out.shape)
    np.add.at(out.reshape(-1), flat, src[take])
    return FourierField(d, n, out, mean_zero=field.mean_zero)


def alias_fold(field: FourierField, n: int) -> FourierField:
    """Fold the out-of-band components into the band.

    Each frequency with some |k^j| > n is relocated by
    k^j -> k^j - (2n+1) sign(k^j) per offending coordinate; in-band
    components are dropped (this is the complement of the sharp projection).
    """
    return _fold(field, n, keep_inband=False)


def q_n(field: FourierField, n: int) -> FourierField:
    """Sharp projection plus aliasing fold.

    On the range of the degree-n interpolant this reproduces sitewise lattice
    products: q_n(x^3) equals ext applied to the sitewise cube of the lattice
    restriction of x, exactly.
    """
    return _fold(field, n, keep_inband=True)


# ---------------------------------------------------------------------------
# exact products

def pointwise_product(a: FourierField, b: FourierField) -> FourierField:
    """Exact pointwise product; output band is the sum of the input bands."""
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    m = a.cutoff + b.cutoff
    va = grid_inverse(pad_box(a.coeffs, a.cutoff, m, a.dim), a.dim)
    vb = grid_inverse(pad_box(b.coeffs, b.cutoff, m, b.dim), b.dim)
    coeffs = grid_forward(va * vb, a.dim)
    return FourierField(a.dim, m, coeffs,
                        mean_zero=False)


def pointwise_power(a: FourierField, n: int) -> FourierField:
    """Exact sitewise n-th power (band grows n-fold)."""
    m = n * a.cutoff
    v = grid_inverse(pad_box(a.coeffs, a.cutoff, m, a.dim), a.dim).real
    return FourierField(a.dim, m, grid_forward(v**n, a.dim), mean_zero=False)


# ---------------------------------------------------------------------------
# inner products and norms


def inner_product(a: FourierField, b: FourierField) -> float:
    """L^2(T^d) pairing of two real fields."""
    x, y = pad_to_common(a, b)
    return float(np.real(np.sum(x.coeffs * np.conj(y.coeffs))))


def l2_norm(f) -> float:
    """L^2 norm (mode side for FourierField, eps-weighted sum for lattice)."""
    if isinstance(f, FourierField):
        return float(np.sqrt(np.sum(np.abs(f.coeffs) ** 2)))
    return float(np.sqrt(np.sum(f.eps**f.dim * f.values**2)))


def lp_lattice_norm(lat: LatticeField, p: float) -> float:
    """L^p(Lambda_eps) norm with eps^d site weights."""
    if np.isinf(p):
        return float(np.abs(lat.values).max())
    return float((np.sum(lat.eps**lat.dim * np.abs(lat.values) ** p)) ** (1.0 / p))


# ---------------------------------------------------------------------------
# constructors


def zero_field(dim: int, cutoff: int, mean_zero: bool = True) -> FourierField:
    return FourierField(dim, cutoff, np.zeros((2 * cutoff + 1,) * dim, dtype=complex),
                        mean_zero=mean_zero)


def single_mode_field(dim: int, cutoff: int, k, amplitude: complex = 1.0) -> FourierField:
    """The real field amplitude*e_k + conj(amplitude)*e_{-k}."""
    f = zero_field(dim, cutoff, mean_zero=not all(ki == 0 for ki in k))
    idx = tuple(int(ki) + cutoff for ki in k)
    ridx = tuple(-int(ki) + cutoff for ki in k)
    f.coeffs[idx] += amplitude
    f.coeffs[ridx] += np.conj(amplitude)
    return f
