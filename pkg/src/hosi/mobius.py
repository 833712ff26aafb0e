"""Subset-lattice alternating-sum (Moebius) and zeta transforms.

Cumulative indices and per-subset components are mutually related by
component(u) = sum_{v subset u} (-1)^{|u - v|} cumulative(v)  and its
inverse cumulative(u) = sum_{v subset u} component(v).  Dense maps over
the full lattice (d <= 20) use the in-place O(d 2^d) subset-sum
transforms; sparse maps work on any downward-closed family and raise
listing the missing subsets otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .core import FULL_ENUMERATION_CAP, VarSubset


class IncompleteLatticeError(ValueError):
    def __init__(self, missing: list[VarSubset]):
        self.missing = missing
        preview = ", ".join(str(u) for u in missing[:8])
        more = "" if len(missing) <= 8 else f" (+{len(missing) - 8} more)"
        super().__init__(f"transform needs every subset of each requested set; missing: {preview}{more}")


@dataclass
class SubsetMap:
    """Association from VarSubset to a real value.

    Dense storage (one float per mask) for full-lattice maps, dict storage
    for partial families.
    """

    d: int
    values: dict[int, float]

    def __post_init__(self):
        if self.d > FULL_ENUMERATION_CAP and len(self.values) >= (1 << FULL_ENUMERATION_CAP):
            raise ValueError(f"dense subset maps are capped at d <= {FULL_ENUMERATION_CAP}")

    @classmethod
    def from_pairs(cls, d: int, pairs: Iterable[tuple[VarSubset, float]]) -> "SubsetMap":
        return cls(d, {u.mask: float(v) for u, v in pairs})

    @classmethod
    def from_dense(cls, d: int, dense: np.ndarray) -> "SubsetMap":
        if dense.shape != (1 << d,):
            raise ValueError(f"dense array must have 2^{d} entries")
        return cls(d, {m: float(dense[m]) for m in range(1 << d)})

    @classmethod
    def from_function(cls, d: int, fn, subsets: Iterable[VarSubset] | None = None) -> "SubsetMap":
        if subsets is None:
            subsets = [VarSubset(m, d) for m in range(1 << d)]
        return cls.from_pairs(d, ((u, fn(u)) for u in subsets))

    def get(self, u: VarSubset) -> float:
        return self.values[u.mask]

    def subsets(self) -> list[VarSubset]:
        return [VarSubset(m, self.d) for m in sorted(self.values)]

    def items(self) -> list[tuple[VarSubset, float]]:
        return [(VarSubset(m, self.d), self.values[m]) for m in sorted(self.values)]

    @property
    def is_full_lattice(self) -> bool:
        return len(self.values) == 1 << self.d

    def to_dense(self) -> np.ndarray:
        if not self.is_full_lattice:
            raise ValueError("map does not cover the full lattice")
        out = np.empty(1 << self.d)
        for m, v in self.values.items():
            out[m] = v
        return out

    def _missing_downward(self) -> list[VarSubset]:
        # the empty set is never reported: cumulative indices and component
        # maps are both 0 there by convention
        missing = set()
        for mask in self.values:
            sub = mask
            while True:
                if sub and sub not in self.values:
                    missing.add(sub)
                if sub == 0:
                    break
                sub = (sub - 1) & mask
        return [VarSubset(m, self.d) for m in sorted(missing)]

    def _value_with_convention(self, mask: int) -> float:
        if mask == 0:
            return self.values.get(0, 0.0)
        return self.values[mask]


def _fast_transform(dense: np.ndarray, d: int, sign: float) -> np.ndarray:
    out = dense.copy()
    idx = np.arange(1 << d)
    for j in range(d):
        bit = 1 << j
        has = (idx & bit).astype(bool)
        out[has] += sign * out[idx[has] ^ bit]
    return out


def moebius_transform(cumulative: SubsetMap) -> SubsetMap:
    """Components from cumulative values: out(u) = sum (-1)^|u-v| cum(v).

    Partial maps must cover a downward-closed family (every nonempty
    subset of each requested set); the empty set defaults to 0.
    """
    if cumulative.is_full_lattice:
        return SubsetMap.from_dense(cumulative.d, _fast_transform(cumulative.to_dense(), cumulative.d, -1.0))
    missing = cumulative._missing_downward()
    if missing:
        raise IncompleteLatticeError(missing)
    out = {}
    for mask, _ in cumulative.values.items():
        total = 0.0
        sub, bits = mask, bin(mask).count("1")
        while True:
            total += (-1.0) ** (bits - bin(sub).count("1")) * cumulative._value_with_convention(sub)
            if sub == 0:
                break
            sub = (sub - 1) & mask
        out[mask] = total
    return SubsetMap(cumulative.d, out)


def zeta_transform(components: SubsetMap) -> SubsetMap:
    """Cumulative values from components: out(u) = sum_{v subset u} comp(v).

    Inverse of ``moebius_transform``; same downward-closure contract.
    """
    if components.is_full_lattice:
        return SubsetMap.from_dense(components.d, _fast_transform(components.to_dense(), components.d, +1.0))
    missing = components._missing_downward()
    if missing:
        raise IncompleteLatticeError(missing)
    out = {}
    for mask in components.values:
        total, sub = 0.0, mask
        while True:
            total += components._value_with_convention(sub)
            if sub == 0:
                break
            sub = (sub - 1) & mask
        out[mask] = total
    return SubsetMap(components.d, out)


def moebius_with_errors(cumulative: SubsetMap, variances: SubsetMap) -> tuple[SubsetMap, SubsetMap]:
    """Moebius transform plus propagated variances.

    Variances add across the alternating sum under an independence
    assumption (signs square to one), so the propagated variance map is
    the zeta transform of the input variances.  The result is approximate:
    estimates sharing a design are positively correlated.
    """
    comp = moebius_transform(cumulative)
    var = zeta_transform(variances)
    return comp, var
