"""Fourier multilinear operator, spectral indices, and Dirichlet weighting.

The p-fold multilinear product pairs p functions through cyclic
fractional differences {(-1)^j (x_j - x_{j+})} and is diagonal on the
exponential basis: on pure tones it is 1 when the frequencies follow the
alternating pattern k_j = (-1)^j k_0 and 0 otherwise.  Applied p times to
one function it yields the spectral moment
``sum_k c(k)^ceil(p/2) c(-k)^floor(p/2)`` (for real f and even p, the sum
of |c(k)|^p), and restricting the cyclic differences to the coordinates
in a subset u while keeping p independent complement blocks estimates the
cumulative spectral index of u.

Complex arithmetic is confined to the TrigPolynomial coefficient-space
oracle; all MC estimators consume real-valued functions and produce real
estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from ._mc import mean_and_se, run_chunks
from .core import BlackBoxFunction, VarSubset, as_point
from .sampling import SpectralDesign

_SIN_GUARD = 1e-9


@dataclass(frozen=True)
class SpectralEstimate:
    """One spectral index estimate with its provenance."""

    subset: VarSubset
    p: int
    value: float
    std_error: float
    n: int
    variant: str
    seed: int
    notes: tuple[str, ...] = ()


class TrigPolynomial(BlackBoxFunction):
    """Finite Fourier series; the coefficient-space oracle for all spectral paths.

    ``terms`` maps an integer frequency vector to its complex coefficient.
    Evaluation returns the real part (a real-valued series has conjugate
    symmetric coefficients, making the imaginary part vanish).
    """

    def __init__(self, terms: dict, dim: int):
        self.terms = {tuple(int(v) for v in k): complex(c) for k, c in terms.items()}
        self.dim = dim
        for k in self.terms:
            if len(k) != dim:
                raise ValueError(f"frequency {k} does not have dim={dim}")

    def coefficient(self, k) -> complex:
        return self.terms.get(tuple(int(v) for v in k), 0.0 + 0.0j)

    @property
    def mean(self) -> complex:
        return self.coefficient((0,) * self.dim)

    def is_real_valued(self, tol: float = 1e-12) -> bool:
        return all(
            abs(c - np.conj(self.coefficient(tuple(-v for v in k)))) <= tol
            for k, c in self.terms.items()
        )

    def imag_residual(self, pts) -> float:
        """Largest |imaginary part| over a batch; diagnostic for symbolic paths."""
        vals = self._eval_complex(np.atleast_2d(as_point(pts, self.dim)))
        return float(np.max(np.abs(vals.imag))) if vals.size else 0.0

    def anova_part(self, u: VarSubset) -> "TrigPolynomial":
        """Sub-series with frequency support exactly u."""
        axes = set(u.axes)
        kept = {
            k: c for k, c in self.terms.items() if {j for j, v in enumerate(k) if v} == axes
        }
        return TrigPolynomial(kept, self.dim)

    def _eval_complex(self, pts):
        out = np.zeros(pts.shape[0], dtype=np.complex128)
        for k, c in self.terms.items():
            out += c * np.exp(2j * np.pi * (pts @ np.asarray(k, dtype=np.float64)))
        return out

    def _eval_batch(self, pts):
        return self._eval_complex(pts).real


def spectral_moment(poly: TrigPolynomial, p: int) -> complex:
    """Exact p-th spectral moment sum_k c(k)^ceil(p/2) c(-k)^floor(p/2)."""
    hi, lo = -(-p // 2), p // 2
    total = 0.0 + 0.0j
    for k, c in poly.terms.items():
        if c == 0:
            continue
        total += c**hi * poly.coefficient(tuple(-v for v in k)) ** lo
    return total


def spectral_index_exact(poly: TrigPolynomial, u: VarSubset, p: int) -> float:
    """Exact cumulative spectral index: coefficient sum over supp(k) in u, minus mu^p."""
    axes = set(u.axes)
    hi, lo = -(-p // 2), p // 2
    total = 0.0 + 0.0j
    for k, c in poly.terms.items():
        if c == 0 or not {j for j, v in enumerate(k) if v}.issubset(axes):
            continue
        total += c**hi * poly.coefficient(tuple(-v for v in k)) ** lo
    total -= poly.mean**p
    if abs(total.imag) > 1e-10 * max(1.0, abs(total.real)):
        raise ValueError(f"cumulative spectral index has imaginary part {total.imag}")
    return float(total.real)


def exact_multilinear(polys: list[TrigPolynomial]) -> complex:
    """Exact p-fold multilinear product from coefficients.

    Only frequency tuples with k_j = (-1)^j k survive, giving
    sum_k prod_j c_j((-1)^j k).
    """
    total = 0.0 + 0.0j
    for k in polys[0].terms:
        term = 1.0 + 0.0j
        for j, poly in enumerate(polys):
            kj = k if j % 2 == 0 else tuple(-v for v in k)
            term *= poly.coefficient(kj)
            if term == 0:
                break
        total += term
    return total


def dirichlet_polynomial(n_max: int, dim: int) -> TrigPolynomial:
    """Dirichlet kernel as a TrigPolynomial: unit coefficients on {-N..N}^d."""
    rng = range(-n_max, n_max + 1)
    terms = {}

    def rec(prefix):
        if len(prefix) == dim:
            terms[tuple(prefix)] = 1.0 + 0.0j
            return
        for v in rng:
            rec(prefix + [v])

    rec([])
    return TrigPolynomial(terms, dim)


def dirichlet_kernel(n_max: int, x) -> float | np.ndarray:
    """Dirichlet kernel prod_j sin(2 pi (N + 1/2) x_j) / sin(pi x_j).

    The removable singularity at x_j in {0, 1} takes the value 2N + 1;
    within 1e-9 of it the factor switches to the limit value with its
    first-order (quadratic in the offset) correction for stability.
    """
    if n_max < 0:
        raise ValueError("N must be >= 0")
    pts = as_point(x)
    single = pts.ndim <= 1
    mat = np.atleast_2d(pts)
    m = 2 * n_max + 1
    s = np.sin(np.pi * mat)
    near = np.abs(s) < _SIN_GUARD
    delta = mat - np.round(mat)
    limit = m * (1.0 - (m * m - 1) * (np.pi * delta) ** 2 / 6.0)
    safe = np.where(near, 1.0, s)
    ratio = np.sin(2.0 * np.pi * (n_max + 0.5) * mat) / safe
    factors = np.where(near, limit, ratio)
    out = factors.prod(axis=-1)
    return float(out[0]) if single else out


def _fourier_args_chunk(ublocks: np.ndarray, reduced: bool, p: int) -> np.ndarray:
    """u-coordinate arguments for the spectral integrand, shape (m, p, |u|)."""
    if not reduced:
        return backend.frac_cyclic_diff(ublocks)
    m, _, cu = ublocks.shape
    args = np.empty((m, p, cu))
    args[:, : p - 1] = ublocks
    args[:, p - 1] = backend.frac_alt_sum(ublocks)
    return args


def multilinear_product(fs: list, design: SpectralDesign, workers: int = 1) -> SpectralEstimate:
    """MC estimate of the p-fold multilinear product of fs.

    ``design`` must carry p = len(fs) full-dimensional blocks.
    """
    p = len(fs)
    if p < 2:
        raise ValueError("the multilinear product needs p >= 2 functions")
    d = fs[0].dim
    if any(g.dim != d for g in fs):
        raise ValueError("all functions must share one dimension")
    if design.p != p or len(design.u) != d or design.reduced:
        raise ValueError("design must have p full-dimensional blocks")

    def chunk_fn(start, ublocks, compblocks):
        args = backend.frac_cyclic_diff(ublocks)
        prod = np.ones(args.shape[0])
        for j, g in enumerate(fs):
            prod *= g(args[:, j, :])
        return prod, None

    contributions, _ = run_chunks(design, chunk_fn, workers)
    value, se = mean_and_se(contributions)
    return SpectralEstimate(VarSubset.full(d), p, value, se, design.n, "multilinear", design.seed)


def estimate_spectral_index(
    f: BlackBoxFunction,
    u: VarSubset,
    p: int,
    design: SpectralDesign,
    workers: int = 1,
) -> SpectralEstimate:
    """MC estimate of the cumulative spectral index of order p for subset u.

    u-coordinates of the p argument points are cyclic fractional
    differences of the design's u-blocks; complement coordinates are p
    independent blocks.  With a reduced design the first p-1 u-blocks pass
    through unchanged and the last argument is their alternating
    fractional sum, cutting the integration dimension by |u|.  The pooled
    mean of all n*p evaluations, raised to p, estimates mu^p (its
    covariance with the leading term is ignored, so the reported standard
    error is approximate).
    """
    variant = "reduced_p_minus_1_d" if design.reduced else "full_pd"
    if len(u) == 0:
        return SpectralEstimate(u, p, 0.0, 0.0, design.n, variant, design.seed)
    if design.p != p or design.u != u or design.d != f.dim:
        raise ValueError("design does not match (f, u, p)")

    axes = list(u.axes)
    comp_axes = [j for j in range(f.dim) if j not in axes]

    def chunk_fn(start, ublocks, compblocks):
        m = ublocks.shape[0]
        uargs = _fourier_args_chunk(ublocks, design.reduced, p)
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
    notes = () if p % 2 == 0 else ("odd p without Dirichlet weighting is experimental",)
    return SpectralEstimate(u, p, raw_mean - mu_hat**p, se, design.n, variant, design.seed, notes)


def estimate_spectral_index_reduced(
    f: BlackBoxFunction,
    u: VarSubset,
    p: int,
    design: SpectralDesign,
    workers: int = 1,
) -> SpectralEstimate:
    """Reduced-dimension spectral estimator; requires a reduced design."""
    if not design.reduced and len(u) > 0:
        raise ValueError("the reduced estimator needs a design built with reduced=True")
    return estimate_spectral_index(f, u, p, design, workers)


def estimate_weighted_spectral(
    f: BlackBoxFunction,
    p: int,
    n_max: int,
    modulation,
    design: SpectralDesign,
    workers: int = 1,
) -> SpectralEstimate:
    """MC estimate of the Dirichlet-weighted coefficient sum for odd p.

    Estimates sum over k in {-N..N}^d of |c(k + m)|^(p-1) by placing
    D_N(x) e^(2 pi i m.x) in the last slot of the p-fold multilinear
    product; the integrand's imaginary part integrates to zero, so only
    the real part D_N(arg) cos(2 pi m.arg) is accumulated.
    """
    if p < 3 or p % 2 == 0:
        raise ValueError("the Dirichlet-weighted sum needs odd p >= 3")
    mod = np.asarray(modulation, dtype=np.float64)
    if mod.shape != (f.dim,) or np.any(mod != np.round(mod)):
        raise ValueError("modulation must be an integer vector of length d")
    mod = mod.astype(np.int64)
    if design.p != p or len(design.u) != f.dim or design.reduced:
        raise ValueError("design must have p full-dimensional blocks")

    def chunk_fn(start, ublocks, compblocks):
        args = backend.frac_cyclic_diff(ublocks)
        prod = np.ones(args.shape[0])
        for j in range(p - 1):
            prod *= f(args[:, j, :])
        last = args[:, p - 1, :]
        prod *= dirichlet_kernel(n_max, last)
        if np.any(mod):
            prod *= np.cos(2.0 * np.pi * (last @ mod.astype(np.float64)))
        return prod, None

    contributions, _ = run_chunks(design, chunk_fn, workers)
    value, se = mean_and_se(contributions)
    return SpectralEstimate(
        VarSubset.full(f.dim),
        p,
        value,
        se,
        design.n,
        f"dirichlet_weighted(N={n_max}, m={tuple(int(v) for v in mod)})",
        design.seed,
    )


def exact_weighted_spectral(poly: TrigPolynomial, p: int, n_max: int, modulation) -> float:
    """Exact Dirichlet-weighted sum: sum_{k in {-N..N}^d} |c(k + m)|^(p-1)."""
    if p < 3 or p % 2 == 0:
        raise ValueError("odd p >= 3 required")
    mod = tuple(int(v) for v in np.atleast_1d(modulation))
    if len(mod) != poly.dim:
        raise ValueError("modulation must have length d")
    total = 0.0
    for k in np.ndindex(*(2 * n_max + 1,) * poly.dim):
        shifted = tuple(ki - n_max + mi for ki, mi in zip(k, mod))
        total += abs(poly.coefficient(shifted)) ** (p - 1)
    return total
