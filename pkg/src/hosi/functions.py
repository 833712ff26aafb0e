"""Concrete black-box function families and their per-factor descriptors.

Every factor is a one-dimensional h(x) = mu + tau g(x) with ``int g = 0``
and ``int g^2 = 1``; the normalization is re-verified numerically when a
product or additive spec is constructed.  Factors know their first four
moments exactly and, where a closed form exists, the power sums of their
Fourier (and Walsh) coefficients, which is what the spectral oracles
consume.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.special import zeta as hurwitz_zeta

from .core import BlackBoxFunction, MomentDescriptor

NORMALIZATION_TOL = 1e-10


class UnsupportedOracle(ValueError):
    """Requested closed form is not available for this factor family."""


@lru_cache(maxsize=None)
def _gauss_nodes(order: int):
    return np.polynomial.legendre.leggauss(order)


def integrate_unit(fn, breakpoints: Sequence[float] = (0.0, 1.0), order: int = 96) -> float:
    """Composite Gauss-Legendre quadrature on [0,1] split at breakpoints."""
    xs, ws = _gauss_nodes(order)
    pts = sorted({0.0, 1.0, *(float(b) for b in breakpoints if 0.0 < b < 1.0)})
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        half = 0.5 * (b - a)
        nodes = a + half * (xs + 1.0)
        total += half * float(np.dot(ws, fn(nodes)))
    return total


class Factor:
    """One-dimensional factor h(x) = mu + tau g(x) on [0,1)."""

    def values(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def descriptor(self) -> MomentDescriptor:
        raise NotImplementedError

    @property
    def mu(self) -> float:
        return self.descriptor.mu

    @property
    def tau(self) -> float:
        return self.descriptor.tau

    def breakpoints(self) -> tuple[float, ...]:
        return (0.0, 1.0)

    def power_moment(self, p: int) -> float:
        """Integral of h^p; closed form for p <= 4, quadrature beyond."""
        if p <= 4:
            return self.descriptor.power_moment(p)
        return integrate_unit(lambda x: self.values(x) ** p, self.breakpoints())

    def fourier_power_sum(self, p: int) -> float:
        """Sum over k != 0 of |h-hat(k)|^p (even p)."""
        raise UnsupportedOracle(f"{type(self).__name__} has no Fourier coefficient closed form")

    def walsh_power_sum(self, p: int, base: int) -> float:
        """Sum over k != 0 of |h-hat_wal(k)|^p (even p)."""
        raise UnsupportedOracle(f"{type(self).__name__} has no Walsh coefficient closed form")

    def verify_normalization(self) -> None:
        """Check int g = 0 and int g^2 = 1 numerically (tol 1e-10)."""
        d = self.descriptor
        if d.tau == 0.0:
            return
        g = lambda x: (self.values(x) - d.mu) / d.tau
        err0 = abs(integrate_unit(g, self.breakpoints()))
        err1 = abs(integrate_unit(lambda x: g(x) ** 2, self.breakpoints()) - 1.0)
        if err0 > NORMALIZATION_TOL or err1 > NORMALIZATION_TOL:
            raise ValueError(
                f"{self!r}: normalized part fails int g = 0 / int g^2 = 1 "
                f"(errors {err0:.2e}, {err1:.2e})"
            )


def _require_even(p: int) -> None:
    if p < 2 or p % 2:
        raise UnsupportedOracle(f"coefficient power sums need even p >= 2, got {p}")


@dataclass(frozen=True, repr=True)
class LinearFactor(Factor):
    """h(x) = mu + tau sqrt(12) (x - 1/2)."""

    mu_: float = 1.0
    tau_: float = 1.0

    def values(self, x):
        return self.mu_ + self.tau_ * math.sqrt(12.0) * (np.asarray(x) - 0.5)

    @property
    def descriptor(self):
        return MomentDescriptor(self.mu_, self.tau_**2, 0.0, 1.8)

    def fourier_power_sum(self, p):
        # |h-hat(k)| = tau sqrt(12) / (2 pi |k|) for k != 0
        _require_even(p)
        amp = abs(self.tau_) * math.sqrt(3.0) / math.pi
        return 2.0 * amp**p * float(hurwitz_zeta(p, 1.0))


@dataclass(frozen=True)
class CosineFactor(Factor):
    """h(x) = mu + tau sqrt(2) cos(2 pi x)."""

    mu_: float = 1.0
    tau_: float = 1.0

    def values(self, x):
        return self.mu_ + self.tau_ * math.sqrt(2.0) * np.cos(2.0 * np.pi * np.asarray(x))

    @property
    def descriptor(self):
        return MomentDescriptor(self.mu_, self.tau_**2, 0.0, 1.5)

    def fourier_power_sum(self, p):
        # coefficients tau/sqrt(2) at k = +-1, nothing else
        _require_even(p)
        return 2.0 * (abs(self.tau_) / math.sqrt(2.0)) ** p


@dataclass(frozen=True)
class IndicatorFactor(Factor):
    """h(x) = 1 on [offset, offset + eps), else 0."""

    eps: float
    offset: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.eps < 1.0:
            raise ValueError("eps must be in (0,1)")
        if not 0.0 <= self.offset <= 1.0 - self.eps:
            raise ValueError("offset must keep the interval inside [0,1)")

    def values(self, x):
        x = np.asarray(x)
        return ((x >= self.offset) & (x < self.offset + self.eps)).astype(np.float64)

    def breakpoints(self):
        return (0.0, self.offset, self.offset + self.eps, 1.0)

    @property
    def descriptor(self):
        e = self.eps
        t2 = e * (1.0 - e)
        t = math.sqrt(t2)
        gamma = e * (1.0 - e) * (1.0 - 2.0 * e) / t**3
        kappa = e * (1.0 - e) * (3.0 * e * e - 3.0 * e + 1.0) / t2**2
        return MomentDescriptor(e, t2, gamma, kappa)

    def power_moment(self, p):
        return self.eps  # indicator: h^p = h

    def fourier_power_sum(self, p):
        # offset shifts the phase only; moduli (hence the sum) are unchanged
        _require_even(p)
        return indicator_fourier_power_sum(self.eps, p)

    def walsh_power_sum(self, p, base):
        _require_even(p)
        if self.offset != 0.0:
            raise UnsupportedOracle("Walsh coefficient sums are offset-sensitive; only offset=0 is supported")
        cells = _badic_cells(self.eps, base)
        if cells is None:
            raise UnsupportedOracle(f"eps={self.eps} is not a base-{base} adic fraction")
        m, num = cells
        table = np.zeros(base**m)
        table[:num] = 1.0
        return TableFactor(tuple(table)).walsh_power_sum(p, base)


def _badic_cells(eps: float, base: int, max_level: int = 12):
    """(level m, cell count) with eps = count / base^m, or None."""
    for m in range(0, max_level + 1):
        scaled = eps * base**m
        if abs(scaled - round(scaled)) < 1e-12 and round(scaled) >= 1:
            return m, int(round(scaled))
    return None


def indicator_fourier_power_sum(eps: float, p: int, tol: float = 1e-12) -> float:
    """Sum over k != 0 of |c(k)|^p for the interval indicator of length eps.

    c(k) has modulus |sin(pi k eps)| / (pi |k|).  p = 2 is the exact value
    eps (1 - eps); even p >= 4 is summed with a certified monotone tail
    bound 2 sum_{k>K} (pi k)^{-p} <= 2 K^{1-p} / (pi^p (p-1)) < tol.
    """
    _require_even(p)
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must be in (0,1)")
    if p == 2:
        return eps * (1.0 - eps)
    cutoff = math.ceil((2.0 / (math.pi**p * (p - 1) * tol)) ** (1.0 / (p - 1))) + 1
    k = np.arange(1, cutoff + 1, dtype=np.float64)
    terms = (np.abs(np.sin(np.pi * k * eps)) / (np.pi * k)) ** p
    return 2.0 * math.fsum(terms)


def rectangle_fourier_q4(eps: float) -> float:
    """Full-coefficient fourth-power sum (2/3) eps^3, valid for 0 < eps < 1/2."""
    if not 0.0 < eps < 0.5:
        raise ValueError("the closed form requires 0 < eps < 1/2")
    return (2.0 / 3.0) * eps**3


@dataclass(frozen=True)
class GFunctionFactor(Factor):
    """Sobol' g-function factor (|4x - 2| + a) / (1 + a); small a = important."""

    a: float

    def __post_init__(self):
        if self.a < 0:
            raise ValueError("a must be >= 0")

    def values(self, x):
        x = np.asarray(x)
        return (np.abs(4.0 * x - 2.0) + self.a) / (1.0 + self.a)

    def breakpoints(self):
        return (0.0, 0.5, 1.0)

    @property
    def descriptor(self):
        # |4x-2| is uniform on [0,2]: tau^2 = 1/(3 (1+a)^2), symmetric, kappa = 9/5
        return MomentDescriptor(1.0, 1.0 / (3.0 * (1.0 + self.a) ** 2), 0.0, 1.8)

    def fourier_power_sum(self, p):
        # coefficients 4 / ((1+a) pi^2 k^2) at odd k, zero at even k != 0
        _require_even(p)
        amp = 4.0 / ((1.0 + self.a) * math.pi**2)
        odd_zeta = (1.0 - 2.0 ** (-2.0 * p)) * float(hurwitz_zeta(2 * p, 1.0))
        return 2.0 * amp**p * odd_zeta


@dataclass(frozen=True)
class TableFactor(Factor):
    """Piecewise-constant factor on equal-width cells."""

    table: tuple[float, ...]

    def __post_init__(self):
        if len(self.table) < 1:
            raise ValueError("table must have at least one cell")

    @property
    def cells(self) -> np.ndarray:
        return np.asarray(self.table, dtype=np.float64)

    def values(self, x):
        x = np.asarray(x)
        idx = np.minimum((x * len(self.table)).astype(np.int64), len(self.table) - 1)
        return self.cells[idx]

    def breakpoints(self):
        m = len(self.table)
        return tuple(i / m for i in range(m + 1))

    def power_moment(self, p):
        return float(np.mean(self.cells**p))

    @property
    def descriptor(self):
        v = self.cells
        mu = float(v.mean())
        c = v - mu
        t2 = float(np.mean(c**2))
        if t2 == 0.0:
            return MomentDescriptor(mu, 0.0, 0.0, 0.0)
        t = math.sqrt(t2)
        return MomentDescriptor(mu, t2, float(np.mean(c**3)) / t**3, float(np.mean(c**4)) / t2**2)

    def fourier_power_sum(self, p):
        # residue split: coefficients at k = r (mod M) share |DFT_r| and decay
        # as 1/|k|^p, so each residue class sums to a pair of Hurwitz zetas
        _require_even(p)
        m = len(self.table)
        if m == 1:
            return 0.0
        c = np.fft.fft(self.cells) / m
        total = 0.0
        for r in range(1, m):
            w = (math.sin(math.pi * r / m) / math.pi) ** p * (
                float(hurwitz_zeta(p, r / m)) + float(hurwitz_zeta(p, 1.0 - r / m))
            )
            total += abs(c[r]) ** p * w
        return total

    def walsh_power_sum(self, p, base):
        from .walsh import walsh_coefficients_grid

        _require_even(p)
        m = len(self.table)
        level = round(math.log(m, base))
        if base**level != m:
            raise UnsupportedOracle(f"table length {m} is not a power of base {base}")
        coeffs = walsh_coefficients_grid(self.cells, base)
        return float(np.sum(np.abs(coeffs[1:]) ** p))


FACTOR_FAMILIES = {
    "linear": LinearFactor,
    "cosine": CosineFactor,
    "indicator": IndicatorFactor,
    "gfunction": GFunctionFactor,
    "table": TableFactor,
}


class ProductFunction(BlackBoxFunction):
    """f(x) = product of per-coordinate factors."""

    def __init__(self, factors: Sequence[Factor]):
        self.factors = tuple(factors)
        self.dim = len(self.factors)

    def _eval_batch(self, pts):
        out = np.ones(pts.shape[0])
        for j, factor in enumerate(self.factors):
            out *= factor.values(pts[:, j])
        return out


class AdditiveFunction(BlackBoxFunction):
    """f(x) = mu + sum_j tau_j g_j(x_j) (centered factor parts)."""

    def __init__(self, mu: float, factors: Sequence[Factor]):
        self.offset = float(mu)
        self.factors = tuple(factors)
        self.dim = len(self.factors)

    def _eval_batch(self, pts):
        out = np.full(pts.shape[0], self.offset)
        for j, factor in enumerate(self.factors):
            out += factor.values(pts[:, j]) - factor.mu
        return out


@dataclass(frozen=True)
class ProductFunctionSpec:
    """Product test function with oracle-grade per-factor descriptors."""

    factors: tuple[Factor, ...]

    def __post_init__(self):
        if not self.factors:
            raise ValueError("need at least one factor")
        for factor in self.factors:
            factor.verify_normalization()

    @property
    def dim(self) -> int:
        return len(self.factors)

    def function(self) -> ProductFunction:
        return ProductFunction(self.factors)

    @property
    def descriptors(self) -> tuple[MomentDescriptor, ...]:
        return tuple(f.descriptor for f in self.factors)

    @property
    def mean(self) -> float:
        return float(np.prod([f.mu for f in self.factors]))


@dataclass(frozen=True)
class AdditiveFunctionSpec:
    """Additive test function mu + sum tau_j g_j(x_j)."""

    mu: float
    factors: tuple[Factor, ...]

    def __post_init__(self):
        if not self.factors:
            raise ValueError("need at least one factor")
        for factor in self.factors:
            factor.verify_normalization()

    @property
    def dim(self) -> int:
        return len(self.factors)

    def function(self) -> AdditiveFunction:
        return AdditiveFunction(self.mu, self.factors)

    def centered_moments(self) -> list[tuple[float, float, float]]:
        """(tau^2, int h^3, int h^4) of each centered part h = tau g."""
        out = []
        for f in self.factors:
            d = f.descriptor
            out.append((d.tau2, d.gamma * d.tau**3, d.kappa * d.tau2**2))
        return out


def rectangle_spec(eps: Sequence[float], offset: Sequence[float] | None = None) -> ProductFunctionSpec:
    """Indicator of a hyperrectangle as a product spec."""
    eps = [float(e) for e in eps]
    offs = [0.0] * len(eps) if offset is None else [float(o) for o in offset]
    if len(offs) != len(eps):
        raise ValueError("offset list must match eps list")
    return ProductFunctionSpec(tuple(IndicatorFactor(e, o) for e, o in zip(eps, offs)))


def gfunction_spec(a: Sequence[float]) -> ProductFunctionSpec:
    return ProductFunctionSpec(tuple(GFunctionFactor(float(v)) for v in a))
