"""Base-b Walsh functions, digit arithmetic, and Walsh spectral estimators.

Walsh functions are the characters of [0,1) under digit-wise modular
addition.  ``wal_k(x) = exp(2 pi i (x_1 k_0 + ... + x_a k_{a-1}) / b)``
where x_1, x_2, ... are the base-b digits of x and k_0, ..., k_{a-1} the
digits of the nonnegative index k.  For base 2 the values are +-1 and
digit subtraction coincides with XOR.

The estimators mirror the Fourier ones with the cyclic digit difference
``(neg 1)^j (x_j digit-minus x_{j+})`` in place of the fractional cyclic
difference; base 2 uses a packed-uint64 XOR fast path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from ._mc import mean_and_se, run_chunks
from .core import BlackBoxFunction, VarSubset, as_point, glue
from .fourier import SpectralEstimate
from .sampling import SpectralDesign


@dataclass(frozen=True)
class DigitVector:
    """Finite base-b digit expansion x = sum digits[i] b^-(i+1)."""

    base: int
    digits: tuple[int, ...]

    def __post_init__(self):
        if self.base < 2:
            raise ValueError("base must be >= 2")
        if any(not 0 <= d < self.base for d in self.digits):
            raise ValueError("digits must lie in 0..base-1")

    @classmethod
    def from_real(cls, x: float, base: int, precision: int | None = None) -> "DigitVector":
        """Truncated (never rounded) digit expansion of x in [0,1)."""
        t = backend.default_precision(base) if precision is None else precision
        digits = backend.encode_digits(np.asarray([x]), base, t)[0]
        return cls(base, tuple(int(d) for d in digits))

    def to_real(self) -> float:
        arr = np.asarray(self.digits, dtype=np.uint8)[None, :]
        return float(backend.decode_digits(arr, self.base)[0])

    def _check(self, other: "DigitVector") -> None:
        if self.base != other.base:
            raise ValueError(f"base mismatch: {self.base} vs {other.base}")
        if len(self.digits) != len(other.digits):
            raise ValueError("precision mismatch")


def digit_sub(x: DigitVector, y: DigitVector) -> DigitVector:
    """Digit-wise difference mod b, no carries."""
    x._check(y)
    a = backend.digit_sub(np.asarray(x.digits, np.uint8), np.asarray(y.digits, np.uint8), x.base)
    return DigitVector(x.base, tuple(int(v) for v in a))


def digit_add(x: DigitVector, y: DigitVector) -> DigitVector:
    """Digit-wise sum mod b, no carries."""
    x._check(y)
    a = backend.digit_add(np.asarray(x.digits, np.uint8), np.asarray(y.digits, np.uint8), x.base)
    return DigitVector(x.base, tuple(int(v) for v in a))


def digit_neg(x: DigitVector) -> DigitVector:
    a = backend.digit_neg(np.asarray(x.digits, np.uint8), x.base)
    return DigitVector(x.base, tuple(int(v) for v in a))


@dataclass(frozen=True)
class WalshIndex:
    """Vector of nonnegative per-coordinate Walsh indices in a common base."""

    base: int
    k: tuple[int, ...]

    def __post_init__(self):
        if self.base < 2:
            raise ValueError("base must be >= 2")
        if any(v < 0 for v in self.k):
            raise ValueError("indices must be nonnegative")

    @property
    def dim(self) -> int:
        return len(self.k)


def int_digits(k: int, base: int) -> list[int]:
    """Base-b digits of a nonnegative integer, least significant first."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k == 0:
        return [0]
    out = []
    while k:
        k, r = divmod(k, base)
        out.append(r)
    return out


def neg_index(k: int, base: int) -> int:
    """Digit-wise negation mod b of a nonnegative integer index."""
    digits = int_digits(k, base)
    out, power = 0, 1
    for d in digits:
        out += ((base - d) % base) * power
        power *= base
    return out


def neg_index_vector(k: tuple[int, ...], base: int) -> tuple[int, ...]:
    return tuple(neg_index(v, base) for v in k)


def _roots(base: int) -> np.ndarray:
    """b-th roots of unity with the real values pinned exactly."""
    roots = np.exp(2j * np.pi * np.arange(base) / base)
    roots[0] = 1.0
    if base % 2 == 0:
        roots[base // 2] = -1.0
    return roots


def _phase_1d(k: int, x: np.ndarray, base: int) -> np.ndarray:
    """sum_t x_digit[t] * k_digit[t] mod b, vectorized over points."""
    kd = int_digits(k, base)
    t = min(len(kd), backend.default_precision(base))
    if k == 0:
        return np.zeros(np.shape(x), dtype=np.int64)
    digits = backend.encode_digits(np.asarray(x, dtype=np.float64), base, t).astype(np.int64)
    return digits @ np.asarray(kd[:t], dtype=np.int64) % base


def walsh_eval(k, x, base: int | None = None):
    """Evaluate wal_k at one point or a batch; unit-modulus complex values.

    ``k`` is a WalshIndex or a per-coordinate tuple/int; scalar x with an
    integer k evaluates the one-dimensional function.
    """
    if isinstance(k, WalshIndex):
        base = k.base
        kvec = k.k
    else:
        if base is None:
            raise ValueError("base is required when k is not a WalshIndex")
        kvec = (int(k),) if np.isscalar(k) else tuple(int(v) for v in k)
    pts = as_point(x)
    if len(kvec) == 1 and pts.ndim <= 1:
        single = pts.ndim == 0
        mat = np.atleast_1d(pts)[:, None]
    else:
        single = pts.ndim == 1
        mat = np.atleast_2d(pts)
    if mat.shape[1] != len(kvec):
        raise ValueError(f"point dimension {mat.shape[1]} != index dimension {len(kvec)}")
    phase = np.zeros(mat.shape[0], dtype=np.int64)
    for j, kj in enumerate(kvec):
        phase += _phase_1d(kj, mat[:, j], base)
    out = _roots(base)[phase % base]
    return complex(out[0]) if single else out


class WalshFunction(BlackBoxFunction):
    """Real part of a finite Walsh series, as a black box."""

    def __init__(self, base: int, terms: dict[tuple[int, ...], complex], dim: int):
        self.base = base
        self.terms = {tuple(int(v) for v in k): complex(c) for k, c in terms.items()}
        self.dim = dim

    def _eval_batch(self, pts):
        out = np.zeros(pts.shape[0], dtype=np.complex128)
        for k, c in self.terms.items():
            phase = np.zeros(pts.shape[0], dtype=np.int64)
            for j, kj in enumerate(k):
                phase += _phase_1d(kj, pts[:, j], self.base)
            out += c * _roots(self.base)[phase % self.base]
        return out.real


def walsh_dirichlet(m: int, base: int, x) -> np.ndarray | float:
    """Sum of all wal_k with every k_j < b^m, evaluated at x.

    The character sum is supported on the box prod_j [0, b^-m) and equals
    b^(m d) there (each of the b^(m d) characters contributes 1); it is 0
    elsewhere.  Verified against the explicit sum in the test suite.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    pts = as_point(x)
    single = pts.ndim <= 1
    mat = np.atleast_2d(pts)
    if pts.ndim == 1:
        mat = pts[None, :]
    d = mat.shape[1]
    inside = np.all(mat < float(base) ** (-m), axis=1)
    val = inside * float(base) ** (m * d)
    return float(val[0]) if single else val


def walsh_coefficients_grid(values: np.ndarray, base: int) -> np.ndarray:
    """Exact Walsh coefficients of a piecewise-constant grid function.

    Each axis must have b^m cells.  Functions that are constant on base-b
    cells at level m have coefficients supported on k_j < b^m_j, so the
    returned array of that shape is the complete (Chrestenson) spectrum.
    """
    values = np.asarray(values, dtype=np.float64)
    out = values.astype(np.complex128)
    for axis, m_cells in enumerate(values.shape):
        level = round(math.log(m_cells, base))
        if base**level != m_cells:
            raise ValueError(f"axis {axis} has {m_cells} cells; must be a power of base {base}")
        mat = np.conj(_character_matrix(base, level))
        out = np.moveaxis(np.tensordot(mat, out, axes=([1], [axis])), 0, axis)
    return out / values.size


def _character_matrix(base: int, level: int) -> np.ndarray:
    """W[k, i] = wal_k(i / b^level) for k, i < b^level."""
    m = base**level
    ks = np.arange(m)
    kd = np.empty((m, max(level, 1)), dtype=np.int64)
    xd = np.empty((m, max(level, 1)), dtype=np.int64)
    rem = ks.copy()
    for t in range(max(level, 1)):
        kd[:, t] = rem % base
        rem //= base
    # fractional digit t+1 of i / b^level is integer digit level-1-t of i
    rem = ks.copy()
    for s in range(max(level, 1)):
        digit = rem % base
        rem //= base
        if s < level:
            xd[:, level - 1 - s] = digit
    if level == 0:
        return np.ones((1, 1), dtype=np.complex128)
    phase = (xd @ kd.T) % base  # phase[i, k]
    return _roots(base)[phase].T


def _coeff_lookup(coeffs, k: tuple[int, ...], base: int) -> complex:
    if isinstance(coeffs, dict):
        return complex(coeffs.get(tuple(k), 0.0))
    try:
        return complex(coeffs[tuple(k)])
    except IndexError:
        return 0.0


def _coeff_keys(coeffs) -> list[tuple[int, ...]]:
    if isinstance(coeffs, dict):
        return [tuple(int(v) for v in k) for k in coeffs]
    return [tuple(int(v) for v in idx) for idx in np.ndindex(np.shape(coeffs))]


def walsh_spectral_moment(coeffs, p: int, base: int) -> complex:
    """Exact sigma_{p,wal}: sum_k c(k)^ceil(p/2) c(neg k)^floor(p/2).

    ``coeffs`` is a finite map {k tuple: coefficient} or a dense array.
    For even p and a real-valued function this is sum_k |c(k)|^p.
    """
    hi, lo = -(-p // 2), p // 2
    total = 0.0 + 0.0j
    for k in _coeff_keys(coeffs):
        c = _coeff_lookup(coeffs, k, base)
        if c == 0:
            continue
        cneg = _coeff_lookup(coeffs, neg_index_vector(k, base), base)
        total += c**hi * cneg**lo
    return total


def walsh_index_exact(coeffs, u: VarSubset, p: int, base: int) -> float:
    """Exact cumulative Walsh index: coefficient sum over supp(k) in u, minus mu^p."""
    hi, lo = -(-p // 2), p // 2
    total = 0.0 + 0.0j
    for k in _coeff_keys(coeffs):
        supp = {j for j, kj in enumerate(k) if kj}
        if not supp.issubset(set(u.axes)):
            continue
        c = _coeff_lookup(coeffs, k, base)
        if c == 0:
            continue
        total += c**hi * _coeff_lookup(coeffs, neg_index_vector(k, base), base) ** lo
    mu = _coeff_lookup(coeffs, (0,) * u.dim, base)
    total -= mu**p
    if abs(total.imag) > 1e-10 * max(1.0, abs(total.real)):
        raise ValueError(f"cumulative Walsh index has non-negligible imaginary part {total.imag}")
    return float(total.real)


def exact_multilinear_walsh(coeff_maps: list, base: int, dim: int) -> complex:
    """Exact p-fold Walsh multilinear product from coefficient maps.

    Only index tuples with k_j = (neg)^j k_0 survive, so the value is
    sum_k prod_j c_j((neg)^j k).
    """
    total = 0.0 + 0.0j
    for k in _coeff_keys(coeff_maps[0]):
        term = 1.0 + 0.0j
        kneg = neg_index_vector(k, base)
        for j, cmap in enumerate(coeff_maps):
            term *= _coeff_lookup(cmap, k if j % 2 == 0 else kneg, base)
            if term == 0:
                break
        total += term
    return total


def _walsh_args_chunk(ublocks, base: int, reduced: bool, p: int):
    """Cyclic digit differences (full) or alternating sums (reduced).

    Returns the real-valued u-coordinate arguments, shape (m, p, |u|).
    """
    m, q, cu = ublocks.shape
    if base == 2:
        bits = backend.bits_encode(ublocks)
        if not reduced:
            args = backend.bits_cyclic_diff(bits)
        else:
            args = np.empty((m, p, cu), dtype=np.uint64)
            args[:, : p - 1] = bits
            args[:, p - 1] = backend.bits_alt_sum(bits)
        return backend.bits_decode(args)
    t = backend.default_precision(base)
    digits = backend.encode_digits(ublocks, base, t)
    if not reduced:
        args = backend.digit_cyclic_diff(digits, base)
    else:
        args = np.empty((m, p, cu, t), dtype=np.uint8)
        args[:, : p - 1] = digits
        args[:, p - 1] = backend.digit_alt_sum(digits, base)
    return backend.decode_digits(args, base)


def estimate_walsh_index(
    f: BlackBoxFunction,
    u: VarSubset,
    p: int,
    base: int,
    design: SpectralDesign,
    workers: int = 1,
) -> SpectralEstimate:
    """MC estimate of the cumulative Walsh index of order p for subset u.

    The u-coordinates of the p argument points are cyclic digit
    differences of the design's u-blocks (alternating digit sums of p-1
    blocks in the reduced form); complement coordinates are p independent
    blocks.  The pooled p-th power of the argument evaluations estimates
    mu^p.  Even p gives a nonnegative estimand; odd p is reported as-is.
    """
    if base < 2:
        raise ValueError("base must be >= 2")
    variant = ("reduced_p_minus_1_d" if design.reduced else "full_pd") + f"_walsh_b{base}"
    if len(u) == 0:
        return SpectralEstimate(u, p, 0.0, 0.0, design.n, variant, design.seed)
    if design.p != p or design.u != u or design.d != f.dim:
        raise ValueError("design does not match (f, u, p)")

    axes = list(u.axes)
    comp_axes = [j for j in range(f.dim) if j not in axes]

    def chunk_fn(start, ublocks, compblocks):
        m = ublocks.shape[0]
        uargs = _walsh_args_chunk(ublocks, base, design.reduced, p)
        prod = np.ones(m)
        total = 0.0
        pts = np.empty((m, f.dim))
        for j in range(p):
            pts[:, axes] = uargs[:, j, :]
            if comp_axes:
                pts[:, comp_axes] = compblocks[:, j, :]
            vals = f(pts)
            prod *= vals
            total += math.fsum(vals)
        return prod, total

    contributions, sums = run_chunks(design, chunk_fn, workers)
    raw_mean, se = mean_and_se(contributions)
    mu_hat = math.fsum(sums) / (design.n * p)
    notes = () if p % 2 == 0 else ("odd p: estimand may be negative; reported as-is",)
    return SpectralEstimate(
        u, p, raw_mean - mu_hat**p, se, design.n, variant, design.seed, notes
    )


def multilinear_product_walsh(
    fs: list, base: int, design: SpectralDesign, workers: int = 1
) -> SpectralEstimate:
    """MC estimate of the p-fold Walsh multilinear product of fs.

    ``design`` must carry p = len(fs) full-dimensional blocks.
    """
    p = len(fs)
    d = fs[0].dim
    if any(g.dim != d for g in fs):
        raise ValueError("all functions must share one dimension")
    if design.p != p or len(design.u) != d or design.reduced:
        raise ValueError("design must have p full-dimensional blocks")

    def chunk_fn(start, ublocks, compblocks):
        args = _walsh_args_chunk(ublocks, base, False, p)
        prod = np.ones(args.shape[0])
        for j, g in enumerate(fs):
            prod *= g(args[:, j, :])
        return prod, None

    contributions, _ = run_chunks(design, chunk_fn, workers)
    value, se = mean_and_se(contributions)
    return SpectralEstimate(
        VarSubset.full(d), p, value, se, design.n, f"multilinear_walsh_b{base}", design.seed
    )
