"""Domain types shared by every estimator.

Points live on the half-open unit cube [0,1)^d; a coordinate equal to
exactly 1.0 is wrapped to 0.0 (fractional part), anything else outside
[0,1] is rejected.  Variable subsets are bitmasks over 1-based variable
indices, capped at d <= 63 so a subset fits a 64-bit word.  All types are
immutable value objects and safe to share across threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

MAX_DIM = 63
FULL_ENUMERATION_CAP = 20


class EvaluationError(RuntimeError):
    """A black-box evaluation produced a non-finite value."""

    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = None if point is None else np.asarray(point)


@dataclass(frozen=True, order=True)
class VarSubset:
    """Subset of the variable indices {1, ..., dim} stored as a bitmask.

    Bit i (0-based) of ``mask`` corresponds to variable i+1.
    """

    mask: int
    dim: int

    def __post_init__(self):
        if not 1 <= self.dim <= MAX_DIM:
            raise ValueError(f"dim must be in 1..{MAX_DIM}, got {self.dim}")
        if self.mask < 0 or self.mask >> self.dim:
            raise ValueError(f"mask {self.mask:#x} has bits beyond dim={self.dim}")

    @classmethod
    def from_indices(cls, indices: Iterable[int], dim: int) -> "VarSubset":
        mask = 0
        for j in indices:
            if not 1 <= j <= dim:
                raise ValueError(f"variable index {j} outside 1..{dim}")
            mask |= 1 << (j - 1)
        return cls(mask, dim)

    @classmethod
    def empty(cls, dim: int) -> "VarSubset":
        return cls(0, dim)

    @classmethod
    def full(cls, dim: int) -> "VarSubset":
        return cls((1 << dim) - 1, dim)

    @classmethod
    def parse(cls, text: str, dim: int) -> "VarSubset":
        """Parse ``{1,3}`` (or ``{}`` for the empty set)."""
        text = text.strip()
        if not (text.startswith("{") and text.endswith("}")):
            raise ValueError(f"subset must look like {{1,3}}, got {text!r}")
        body = text[1:-1].strip()
        if not body:
            return cls.empty(dim)
        try:
            indices = [int(tok) for tok in body.split(",")]
        except ValueError as exc:
            raise ValueError(f"bad subset {text!r}: {exc}") from None
        return cls.from_indices(indices, dim)

    @property
    def members(self) -> tuple[int, ...]:
        """1-based member indices, ascending."""
        return tuple(j + 1 for j in range(self.dim) if self.mask >> j & 1)

    @property
    def axes(self) -> tuple[int, ...]:
        """0-based numpy column indices, ascending."""
        return tuple(j for j in range(self.dim) if self.mask >> j & 1)

    @property
    def card(self) -> int:
        return self.mask.bit_count()

    def __len__(self) -> int:
        return self.card

    def __contains__(self, j: int) -> bool:
        return 1 <= j <= self.dim and bool(self.mask >> (j - 1) & 1)

    def __str__(self) -> str:
        return "{" + ",".join(str(j) for j in self.members) + "}"

    def _check_same_dim(self, other: "VarSubset") -> None:
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def complement(self) -> "VarSubset":
        return VarSubset(~self.mask & ((1 << self.dim) - 1), self.dim)

    def union(self, other: "VarSubset") -> "VarSubset":
        self._check_same_dim(other)
        return VarSubset(self.mask | other.mask, self.dim)

    def intersection(self, other: "VarSubset") -> "VarSubset":
        self._check_same_dim(other)
        return VarSubset(self.mask & other.mask, self.dim)

    __or__ = union
    __and__ = intersection

    def issubset(self, other: "VarSubset") -> bool:
        self._check_same_dim(other)
        return self.mask & other.mask == self.mask

    def is_proper_subset(self, other: "VarSubset") -> bool:
        return self.issubset(other) and self.mask != other.mask


def complement(u: VarSubset) -> VarSubset:
    return u.complement()


def enumerate_subsets(dim: int, select: str = "all", max_size: int | None = None) -> list[VarSubset]:
    """Deterministically ordered subsets of {1..dim} (ascending mask value).

    ``select`` is one of ``all``, ``nonempty``, ``singletons``, ``pairs`` or
    ``up_to_size`` (with ``max_size``).  Exponential enumerations are only
    permitted for dim <= 20.
    """
    if not 1 <= dim <= MAX_DIM:
        raise ValueError(f"dim must be in 1..{MAX_DIM}")
    if select in ("all", "nonempty"):
        if dim > FULL_ENUMERATION_CAP:
            raise ValueError(
                f"full subset enumeration needs 2^{dim} masks; only allowed for "
                f"dim <= {FULL_ENUMERATION_CAP}. Use 'singletons', 'pairs' or an "
                f"explicit subset list instead."
            )
        start = 0 if select == "all" else 1
        return [VarSubset(m, dim) for m in range(start, 1 << dim)]
    if select == "singletons":
        return [VarSubset(1 << j, dim) for j in range(dim)]
    if select == "pairs":
        return sorted(
            VarSubset((1 << i) | (1 << j), dim)
            for i, j in itertools.combinations(range(dim), 2)
        )
    if select == "up_to_size":
        if max_size is None:
            raise ValueError("up_to_size requires max_size")
        count = sum(len(list(itertools.combinations(range(dim), r))) for r in range(min(max_size, dim) + 1))
        if count > 1 << FULL_ENUMERATION_CAP:
            raise ValueError(f"up_to_size({max_size}) enumerates {count} subsets; too many for dim={dim}")
        subs = [
            VarSubset.from_indices(c, dim)
            for r in range(min(max_size, dim) + 1)
            for c in itertools.combinations(range(1, dim + 1), r)
        ]
        return sorted(subs)
    raise ValueError(f"unknown selector {select!r}")


def as_point(x, dim: int | None = None) -> np.ndarray:
    """Validate one point (or a batch of points) on [0,1)^d.

    Coordinates equal to exactly 1.0 wrap to 0.0; anything outside [0,1]
    is an error.  Returns a float64 array of the same shape.
    """
    pts = np.asarray(x, dtype=np.float64)
    if dim is not None and pts.shape[-1] != dim:
        raise ValueError(f"expected dimension {dim}, got {pts.shape[-1]}")
    if np.any(~np.isfinite(pts)) or np.any(pts < 0.0) or np.any(pts > 1.0):
        raise ValueError("coordinates must lie in [0,1] (1.0 wraps to 0.0)")
    if np.any(pts == 1.0):
        pts = np.where(pts == 1.0, 0.0, pts)
    return pts


def glue(x, z, u: VarSubset) -> np.ndarray:
    """Point (or batch) taking coordinates in ``u`` from x and the rest from z.

    ``x`` may carry all d columns or just the |u| columns of ``u`` (in
    ascending axis order); ``z`` always carries d columns.
    """
    z = np.asarray(z, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if z.shape[-1] != u.dim:
        raise ValueError(f"z has {z.shape[-1]} columns, expected {u.dim}")
    axes = u.axes
    if x.shape[-1] == u.dim:
        x_part = x[..., axes]
    elif x.shape[-1] == len(axes):
        x_part = x
    else:
        raise ValueError(f"x has {x.shape[-1]} columns, expected {u.dim} or {len(axes)}")
    out = np.array(np.broadcast_to(z, np.broadcast_shapes(x_part.shape[:-1] + (u.dim,), z.shape)))
    if axes:
        out[..., axes] = x_part
    return out


@dataclass(frozen=True)
class MomentDescriptor:
    """First four moment ingredients of one factor h(x) = mu + tau g(x).

    ``gamma`` and ``kappa`` are the third and fourth moments of the
    normalized factor g (so kappa >= 0 and kappa - 3 is its kurtosis).
    """

    mu: float
    tau2: float
    gamma: float
    kappa: float

    def __post_init__(self):
        if self.tau2 < 0:
            raise ValueError("tau2 must be >= 0")
        if self.tau2 > 0 and self.kappa < 0:
            raise ValueError("kappa is a fourth moment and must be >= 0")

    @property
    def tau(self) -> float:
        return float(np.sqrt(self.tau2))

    def power_moment(self, p: int) -> float:
        """Exact integral of h^p for p in {1,2,3,4}."""
        mu, t2, t = self.mu, self.tau2, self.tau
        g, k = self.gamma, self.kappa
        if p == 1:
            return mu
        if p == 2:
            return mu**2 + t2
        if p == 3:
            return mu**3 + 3 * mu * t2 + g * t**3
        if p == 4:
            return mu**4 + 6 * mu**2 * t2 + 4 * mu * g * t**3 + k * t2**2
        raise ValueError(f"closed-form power moment only for p<=4, got p={p}")


class BlackBoxFunction:
    """Deterministic, side-effect-free map [0,1)^d -> R.

    Subclasses implement ``_eval_batch`` on an (n, d) array.  Instances are
    callable on a single point or a batch; evaluation must be safe to run
    concurrently (the estimators rely on this purity contract).
    """

    dim: int

    def _eval_batch(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x):
        pts = as_point(x, self.dim)
        single = pts.ndim == 1
        batch = np.atleast_2d(pts)
        out = np.asarray(self._eval_batch(batch), dtype=np.float64)
        bad = ~np.isfinite(out)
        if np.any(bad):
            i = int(np.argmax(bad))
            raise EvaluationError(
                f"non-finite value {out[i]!r} at point {batch[i].tolist()}", batch[i]
            )
        return float(out[0]) if single else out


class CallableFunction(BlackBoxFunction):
    """Adapter for a plain scalar-valued Python callable."""

    def __init__(self, dim: int, fn: Callable, vectorized: bool = False):
        self.dim = dim
        self._fn = fn
        self._vectorized = vectorized

    def _eval_batch(self, pts):
        if self._vectorized:
            return np.asarray(self._fn(pts), dtype=np.float64)
        return np.asarray([self._fn(p) for p in pts], dtype=np.float64)
