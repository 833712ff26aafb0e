"""Ground truth: closed-form indices for the test families and exact
brute-force computation on small grid functions.

Everything here is exact up to float rounding.  Grid functions (piecewise
constant on a tensor grid, d <= 3) support four independent routes:

* conditional-mean route: cumulative moment index as the exact mean of
  the p-th power of the cell-averaged conditional mean;
* pick-freeze enumeration route: the same quantity by exhaustive
  enumeration of shared/complement cell tuples (no conditional means or
  powers of means anywhere), used to cross-check the first route;
* exact ANOVA: variance components by cell-level recursion;
* spectral routes: Fourier coefficient power sums via residue classes
  and Hurwitz zeta functions (zero truncation error), Walsh power sums
  via the exact finite base-b transform.

The closed forms for product, rectangle and additive families were frozen
only after agreeing with the grid routes; where published displays
disagreed with exhaustive enumeration, enumeration won (see
``resolve_additive_p3_discrepancy`` and the additive fourth-order pair
coefficient, which enumeration fixes at 6, not 2).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import zeta as hurwitz_zeta

from .core import VarSubset, MomentDescriptor
from .functions import (
    AdditiveFunctionSpec,
    Factor,
    ProductFunctionSpec,
    TableFactor,
    UnsupportedOracle,
    indicator_fourier_power_sum,
    rectangle_fourier_q4,
)
from .mobius import SubsetMap, moebius_transform
from .walsh import neg_index, walsh_coefficients_grid

GRID_CELL_CAP = 16**3


class IndexPair(NamedTuple):
    """Cumulative index and its per-subset component for one (u, p)."""

    index: float
    component: float


# ---------------------------------------------------------------------------
# Grid functions and exact brute-force routes


@dataclass(frozen=True)
class GridFunction:
    """Piecewise-constant function on a tensor grid of equal-width cells."""

    values: tuple

    def __post_init__(self):
        arr = self.array
        if arr.ndim < 1 or arr.ndim > 3:
            raise ValueError("grid functions support 1 <= d <= 3")

    @classmethod
    def from_array(cls, arr) -> "GridFunction":
        arr = np.asarray(arr, dtype=np.float64)

        def nest(a):
            return tuple(nest(x) for x in a) if a.ndim > 1 else tuple(float(v) for v in a)

        return cls(nest(arr))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)

    @property
    def dim(self) -> int:
        return self.array.ndim

    @property
    def levels(self) -> tuple[int, ...]:
        return self.array.shape

    def function(self):
        from .core import BlackBoxFunction

        arr = self.array

        class _GridBB(BlackBoxFunction):
            dim = arr.ndim

            def _eval_batch(self, pts):
                idx = tuple(
                    np.minimum((pts[:, j] * arr.shape[j]).astype(np.int64), arr.shape[j] - 1)
                    for j in range(arr.ndim)
                )
                return arr[idx]

        return _GridBB()


def _check_cap(arr: np.ndarray) -> None:
    if arr.size > GRID_CELL_CAP:
        raise ValueError(f"grid has {arr.size} cells; exhaustive oracle capped at {GRID_CELL_CAP}")


def grid_mean(grid: GridFunction) -> float:
    return float(grid.array.mean())


def grid_variance(grid: GridFunction) -> float:
    a = grid.array
    return float(np.mean((a - a.mean()) ** 2))


def grid_conditional_mean(grid: GridFunction, u: VarSubset) -> np.ndarray:
    """Cell values of the conditional mean given the coordinates in u."""
    arr = grid.array
    comp = tuple(j for j in range(arr.ndim) if j not in u.axes)
    return arr.mean(axis=comp) if comp else arr


def grid_moment_index(grid: GridFunction, u: VarSubset, p: int) -> float:
    """Cumulative moment index via the conditional-mean identity.

    The (p+1)-block integral collapses to the mean of the p-th power of
    the conditional mean; on a grid both are finite cell sums.
    """
    arr = grid.array
    _check_cap(arr)
    if len(u) == 0:
        return 0.0
    fbar = grid_conditional_mean(grid, u)
    return float(np.mean(fbar**p) - arr.mean() ** p)


def grid_pickfreeze_index(grid: GridFunction, u: VarSubset, p: int) -> float:
    """Cumulative moment index by exhaustive pick-freeze enumeration.

    Averages the raw product of f over every combination of one shared
    u-cell and p independent complement cells.  Kept free of conditional
    means so it is an independent check of ``grid_moment_index``.  The
    empty subset returns 0 by convention.
    """
    arr = grid.array
    _check_cap(arr)
    if len(u) == 0:
        return 0.0
    axes = u.axes
    comp = tuple(j for j in range(arr.ndim) if j not in axes)
    moved = np.moveaxis(arr, axes + comp, range(arr.ndim))
    u_cells = int(np.prod([arr.shape[j] for j in axes]))
    c_cells = int(np.prod([arr.shape[j] for j in comp])) if comp else 1
    flat = moved.reshape(u_cells, c_cells)
    pieces = []
    for iu in range(u_cells):
        block = flat[iu]
        prod = block
        for _ in range(p - 1):
            prod = np.multiply.outer(prod, block)
        pieces.append(math.fsum(prod.ravel()))
    mu = math.fsum(arr.ravel()) / arr.size
    return math.fsum(pieces) / (u_cells * c_cells**p) - mu**p


def grid_anova_components(grid: GridFunction) -> SubsetMap:
    """Exact variance components sigma_u^2 for every subset."""
    arr = grid.array
    _check_cap(arr)
    d = arr.ndim
    parts: dict[int, np.ndarray] = {}
    comps = {}
    for mask in range(1 << d):
        u = VarSubset(mask, d)
        fbar = grid_conditional_mean(grid, u)
        expand = fbar
        for j in range(d):
            if j not in u.axes:
                expand = np.expand_dims(expand, j)
        expand = np.broadcast_to(expand, arr.shape).copy()
        for sub in range(mask):
            if sub & mask == sub:
                expand -= parts[sub]
        parts[mask] = expand
        comps[mask] = 0.0 if mask == 0 else float(np.mean(expand**2))
    return SubsetMap(d, comps)


def grid_total_effect_index(grid: GridFunction, u: VarSubset) -> float:
    """Total-effect index: sum of variance components touching u."""
    comps = grid_anova_components(grid)
    total = 0.0
    for v, s2 in comps.items():
        if v.mask & u.mask:
            total += s2
    return total


def grid_fourier_sigma(grid: GridFunction, u: VarSubset, p: int) -> float:
    """Exact spectral measure of the ANOVA part f_u for even p.

    Coefficients of an M-cell axis repeat across residue classes
    k = r (mod M) up to the 1/|k|^p decay, so each class sums to a pair of
    Hurwitz zeta values; there is no truncation error.  For the empty
    subset this is mu^p (the measure of the constant part).
    """
    if p < 2 or p % 2:
        raise ValueError("the grid Fourier route needs even p >= 2")
    arr = grid.array
    _check_cap(arr)
    coeff = np.fft.fftn(arr) / arr.size
    if len(u) == 0:
        return float(abs(coeff[(0,) * arr.ndim]) ** p)
    axes = u.axes
    weights = []
    for j in axes:
        m = arr.shape[j]
        w = np.zeros(m)
        for r in range(1, m):
            w[r] = (math.sin(math.pi * r / m) / math.pi) ** p * (
                float(hurwitz_zeta(p, r / m)) + float(hurwitz_zeta(p, 1.0 - r / m))
            )
        weights.append(w)
    total = 0.0
    ranges = [range(1, arr.shape[j]) if j in axes else (0,) for j in range(arr.ndim)]
    for r in itertools.product(*ranges):
        term = abs(coeff[r]) ** p
        for w, j in zip(weights, axes):
            term *= w[r[j]]
        total += term
    return float(total)


def grid_fourier_index(grid: GridFunction, u: VarSubset, p: int) -> float:
    """Exact cumulative spectral index: sum of sigma_p(f_v) over v in u, minus mu^p."""
    total = 0.0
    mask = u.mask
    sub = mask
    while True:
        total += grid_fourier_sigma(grid, VarSubset(sub, u.dim), p)
        if sub == 0:
            break
        sub = (sub - 1) & mask
    return total - grid_mean(grid) ** p


def _neg_perm(m: int, base: int) -> np.ndarray:
    return np.asarray([neg_index(k, base) for k in range(m)], dtype=np.int64)


def grid_walsh_sigma(grid: GridFunction, u: VarSubset, p: int, base: int) -> float:
    """Exact Walsh spectral measure of f_u (levels must be powers of base)."""
    arr = grid.array
    _check_cap(arr)
    coeff = walsh_coefficients_grid(arr, base)
    perms = [_neg_perm(m, base) for m in arr.shape]
    hi, lo = -(-p // 2), p // 2
    axes = set(u.axes)
    total = 0.0 + 0.0j
    for k in np.ndindex(*coeff.shape):
        if {j for j, kj in enumerate(k) if kj} != axes:
            continue
        kneg = tuple(int(perms[j][kj]) for j, kj in enumerate(k))
        total += coeff[k] ** hi * coeff[kneg] ** lo
    if abs(total.imag) > 1e-10 * max(1.0, abs(total.real)):
        raise ValueError("Walsh measure has non-negligible imaginary part")
    return float(total.real)


def grid_walsh_index(grid: GridFunction, u: VarSubset, p: int, base: int) -> float:
    total = 0.0
    sub = u.mask
    while True:
        total += grid_walsh_sigma(grid, VarSubset(sub, u.dim), p, base)
        if sub == 0:
            break
        sub = (sub - 1) & u.mask
    return total - grid_mean(grid) ** p


def grid_indices(grid: GridFunction, u: VarSubset, p: int, family: str = "moment", base: int = 2) -> IndexPair:
    """Brute-force cumulative index and component for one subset."""
    if family == "moment":
        index = grid_moment_index(grid, u, p)
        cum = SubsetMap.from_function(
            grid.dim, lambda v: grid_moment_index(grid, v, p)
        )
        comp = moebius_transform(cum).get(u)
        return IndexPair(index, comp)
    if family == "fourier":
        return IndexPair(
            grid_fourier_index(grid, u, p),
            0.0 if len(u) == 0 else grid_fourier_sigma(grid, u, p),
        )
    if family == "walsh":
        return IndexPair(
            grid_walsh_index(grid, u, p, base),
            0.0 if len(u) == 0 else grid_walsh_sigma(grid, u, p, base),
        )
    raise ValueError(f"unknown family {family!r}")


# ---------------------------------------------------------------------------
# Product functions


def product_moment_indices(spec: ProductFunctionSpec, u: VarSubset, p: int) -> IndexPair:
    """Closed-form moment index of a product function.

    cumulative + mu^p factorizes into per-coordinate power moments of the
    factors inside u times mu_j^p outside.
    """
    if u.dim != spec.dim:
        raise ValueError("subset dimension mismatch")
    mus = [f.mu for f in spec.factors]
    mp = [f.power_moment(p) for f in spec.factors]
    mu_p = np.prod([m**p for m in mus])
    cum = np.prod([mp[j] if j in u.axes else mus[j] ** p for j in range(spec.dim)])
    if len(u) == 0:
        return IndexPair(0.0, 0.0)
    comp = np.prod([(mp[j] - mus[j] ** p) if j in u.axes else mus[j] ** p for j in range(spec.dim)])
    return IndexPair(float(cum - mu_p), float(comp))


def product_spectral_indices(
    spec: ProductFunctionSpec, u: VarSubset, p: int, family: str = "fourier", base: int = 2
) -> IndexPair:
    """Closed-form spectral index of a product function (even p).

    Uses per-factor coefficient power sums: component(u) =
    prod_{j not in u} |mu_j|^p * prod_{j in u} sum_{k != 0} |c_j(k)|^p.
    """
    if u.dim != spec.dim:
        raise ValueError("subset dimension mismatch")
    if p < 2 or p % 2:
        raise UnsupportedOracle("product spectral closed forms need even p >= 2")
    if family == "fourier":
        sums = [f.fourier_power_sum(p) for f in spec.factors]
    elif family == "walsh":
        sums = [f.walsh_power_sum(p, base) for f in spec.factors]
    else:
        raise ValueError(f"unknown family {family!r}")
    mus = [abs(f.mu) ** p for f in spec.factors]
    if len(u) == 0:
        return IndexPair(0.0, 0.0)
    cum = np.prod([(sums[j] + mus[j]) if j in u.axes else mus[j] for j in range(spec.dim)])
    comp = np.prod([sums[j] if j in u.axes else mus[j] for j in range(spec.dim)])
    return IndexPair(float(cum - np.prod(mus)), float(comp))


# ---------------------------------------------------------------------------
# Rectangle indicators


def rectangle_moment_indices(eps, u: VarSubset, p: int) -> IndexPair:
    """Closed forms for the hyperrectangle indicator, moment family.

    index = eps^p (prod_{j in u} eps_j^-(p-1) - 1) and
    component = eps^p prod_{j in u} (eps_j^-(p-1) - 1) with eps the volume.
    """
    eps = np.asarray(eps, dtype=np.float64)
    if np.any((eps <= 0) | (eps >= 1)):
        raise ValueError("eps components must be in (0,1)")
    if u.dim != eps.size:
        raise ValueError("subset dimension mismatch")
    vol = float(np.prod(eps))
    if len(u) == 0:
        return IndexPair(0.0, 0.0)
    inv = [eps[j] ** (-(p - 1)) for j in u.axes]
    return IndexPair(vol**p * (float(np.prod(inv)) - 1.0), vol**p * float(np.prod([v - 1.0 for v in inv])))


def rectangle_fourier_indices(eps, u: VarSubset, p: int, method: str = "auto") -> IndexPair:
    """Closed forms for the rectangle, Fourier family (even p).

    Per-factor full coefficient sum is T_p(eps_j) + eps_j^p; for p = 4 and
    eps_j < 1/2 this equals (2/3) eps_j^3 exactly.  ``method`` is ``auto``
    (closed form where valid, else certified series), ``closed`` (p=4
    only; falls back to the series with a warning when some eps >= 1/2) or
    ``series``.
    """
    import warnings

    eps = np.asarray(eps, dtype=np.float64)
    if np.any((eps <= 0) | (eps >= 1)):
        raise ValueError("eps components must be in (0,1)")
    if u.dim != eps.size:
        raise ValueError("subset dimension mismatch")
    if p < 2 or p % 2:
        raise UnsupportedOracle("rectangle Fourier closed forms need even p >= 2")
    if len(u) == 0:
        return IndexPair(0.0, 0.0)

    def full_sum(e: float) -> float:
        closed_ok = p == 4 and e < 0.5
        if method == "closed" and p == 4 and not closed_ok:
            warnings.warn(
                f"eps={e} >= 1/2: the (2/3) eps^3 identity does not apply; using the series",
                stacklevel=3,
            )
        if method in ("auto", "closed") and closed_ok:
            return rectangle_fourier_q4(e)
        return indicator_fourier_power_sum(e, p) + e**p

    vol = float(np.prod(eps))
    cum = np.prod([full_sum(eps[j]) if j in u.axes else eps[j] ** p for j in range(eps.size)])
    comp = np.prod(
        [(full_sum(eps[j]) - eps[j] ** p) if j in u.axes else eps[j] ** p for j in range(eps.size)]
    )
    return IndexPair(float(cum - vol**p), float(comp))


def rectangle_indices(eps, u: VarSubset, p: int, family: str = "moment", method: str = "auto") -> IndexPair:
    if family == "moment":
        return rectangle_moment_indices(eps, u, p)
    if family == "fourier":
        return rectangle_fourier_indices(eps, u, p, method)
    raise ValueError(f"unknown family {family!r} (rectangle oracles: moment | fourier)")


# ---------------------------------------------------------------------------
# Additive functions


def additive_moment_indices(spec: AdditiveFunctionSpec, u: VarSubset, p: int) -> IndexPair:
    """Exact moment index of an additive function, p in {2, 3, 4}.

    With t_j = tau_j^2, g_j = int h_j^3 and k_j = int h_j^4 of the
    centered parts h_j, enumeration-verified forms are:

    * p=2: index = sum t_j; components t_j on singletons;
    * p=3: index = sum (3 mu t_j + g_j); components 3 mu t_j + g_j on
      singletons (coefficient 3 fixed by brute force, see
      ``resolve_additive_p3_discrepancy``);
    * p=4: index = sum (6 mu^2 t_j + 4 mu g_j + k_j) + 3 ((sum t_j)^2 -
      sum t_j^2); components 6 mu^2 t_j + 4 mu g_j + k_j on singletons and
      6 t_j t_k on pairs, zero beyond.
    """
    if u.dim != spec.dim:
        raise ValueError("subset dimension mismatch")
    mu = spec.mu
    mom = spec.centered_moments()
    t = [mom[j][0] for j in u.axes]
    g = [mom[j][1] for j in u.axes]
    k = [mom[j][2] for j in u.axes]
    if len(u) == 0:
        return IndexPair(0.0, 0.0)
    if p == 2:
        index = math.fsum(t)
        comp = t[0] if len(u) == 1 else 0.0
        return IndexPair(index, comp)
    if p == 3:
        index = math.fsum(3.0 * mu * tj + gj for tj, gj in zip(t, g))
        comp = 3.0 * mu * t[0] + g[0] if len(u) == 1 else 0.0
        return IndexPair(index, comp)
    if p == 4:
        st = math.fsum(t)
        index = math.fsum(
            6.0 * mu**2 * tj + 4.0 * mu * gj + kj for tj, gj, kj in zip(t, g, k)
        ) + 3.0 * (st**2 - math.fsum(tj**2 for tj in t))
        if len(u) == 1:
            comp = 6.0 * mu**2 * t[0] + 4.0 * mu * g[0] + k[0]
        elif len(u) == 2:
            comp = 6.0 * t[0] * t[1]
        else:
            comp = 0.0
        return IndexPair(index, comp)
    raise UnsupportedOracle("additive moment closed forms cover p in {2,3,4}")


def additive_spectral_indices(
    spec: AdditiveFunctionSpec, u: VarSubset, p: int, family: str = "fourier", base: int = 2
) -> IndexPair:
    """Exact spectral index of an additive function (even p).

    Nonzero frequency vectors of mu + sum h_j(x_j) live on single axes, so
    singleton components carry the whole index: component({j}) is the
    coefficient power sum of the centered factor, everything else is 0.
    """
    if u.dim != spec.dim:
        raise ValueError("subset dimension mismatch")
    if p < 2 or p % 2:
        raise UnsupportedOracle("additive spectral closed forms need even p >= 2")

    def centered_sum(factor: Factor) -> float:
        # nonzero-frequency coefficients of h and of h - mu coincide, and the
        # additive part is tau * g = (h - mu) scaled into the factor already
        if family == "fourier":
            return factor.fourier_power_sum(p)
        if family == "walsh":
            return factor.walsh_power_sum(p, base)
        raise ValueError(f"unknown family {family!r}")

    if len(u) == 0:
        return IndexPair(0.0, 0.0)
    index = math.fsum(centered_sum(spec.factors[j]) for j in u.axes)
    comp = centered_sum(spec.factors[u.axes[0]]) if len(u) == 1 else 0.0
    return IndexPair(index, comp)


def additive_indices(
    spec: AdditiveFunctionSpec, u: VarSubset, p: int, family: str = "moment", base: int = 2
) -> IndexPair:
    if family == "moment":
        return additive_moment_indices(spec, u, p)
    return additive_spectral_indices(spec, u, p, family, base)


# ---------------------------------------------------------------------------
# The third-order additive coefficient report


@dataclass(frozen=True)
class AdditiveP3Report:
    """Brute-force arbitration of the singleton third-order coefficient.

    Two candidate closed forms circulate for the cumulative third-order
    index of an additive function: sum(c * mu * tau_j^2 + gamma_j) with
    c = 1 or c = 3.  The report carries both candidates, the exhaustive
    grid value, and which coefficient matches.
    """

    mu: float
    subset: VarSubset
    candidate_coef1: float
    candidate_coef3: float
    brute_force_value: float
    winning_coefficient: int | None
    discriminating: bool

    def one_line(self) -> str:
        if not self.discriminating:
            return (
                f"mu={self.mu}: candidates coincide ({self.candidate_coef1!r}); "
                "non-discriminating input"
            )
        return (
            f"mu={self.mu}: brute force {self.brute_force_value!r} matches "
            f"coefficient {self.winning_coefficient} "
            f"(c1={self.candidate_coef1!r}, c3={self.candidate_coef3!r})"
        )


def resolve_additive_p3_discrepancy(
    seed: int = 0, d: int = 2, levels: int = 8, mu: float | None = None
) -> AdditiveP3Report:
    """Decide the third-order singleton coefficient by exhaustive enumeration.

    Builds a random additive grid function mu + sum h_j with exactly known
    tau_j^2 and gamma_j, evaluates the cumulative index for the full
    subset on the grid, and reports which candidate matches.
    """
    rng = np.random.Generator(np.random.Philox(key=[seed, 0]))
    mu = 0.5 + rng.random() if mu is None else float(mu)
    tables = []
    for _ in range(d):
        v = rng.normal(size=levels)
        v -= v.mean()
        tables.append(v)
    shape = [1] * d
    arr = np.full((levels,) * d, mu)
    for j, v in enumerate(tables):
        shp = shape.copy()
        shp[j] = levels
        arr = arr + v.reshape(shp)
    grid = GridFunction.from_array(arr)
    u = VarSubset.full(d)
    brute = grid_moment_index(grid, u, 3)
    t2 = [float(np.mean(v**2)) for v in tables]
    g3 = [float(np.mean(v**3)) for v in tables]
    c1 = math.fsum(mu * a + b for a, b in zip(t2, g3))
    c3 = math.fsum(3.0 * mu * a + b for a, b in zip(t2, g3))
    scale = max(1.0, abs(brute))
    d1, d3 = abs(brute - c1) / scale, abs(brute - c3) / scale
    if abs(c1 - c3) <= 1e-12 * scale:
        return AdditiveP3Report(mu, u, c1, c3, brute, None, False)
    winner = 1 if d1 < d3 else 3
    if min(d1, d3) > 1e-9:
        raise RuntimeError(
            f"neither candidate matches brute force: brute={brute}, c1={c1}, c3={c3}"
        )
    return AdditiveP3Report(mu, u, c1, c3, brute, winner, True)
