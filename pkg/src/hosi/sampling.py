"""Seedable sampling and pick-freeze design generation.

Reproducibility model: every variate is produced by a counter-based
generator (Philox) keyed by ``(seed, stream_id)``, so any replicate's
draws are reachable without sequential generation and results are
bit-identical for a fixed seed regardless of worker count.  Designs are
generated in fixed-size row chunks; chunk c of a design draws from stream
``(seed, c)``, which makes the design a pure function of its seed tuple.

A randomly shifted rank-1 (Korobov) lattice is available as a drop-in
point set for the same estimators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

import numpy as np

from .core import VarSubset

CHUNK_ROWS = 1 << 16
_SHIFT_STREAM = 1 << 40  # reserved stream id for lattice shifts


@dataclass
class SampleStream:
    """Deterministic uniform stream keyed by (seed, stream_id)."""

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        self._gen = np.random.Generator(np.random.Philox(key=[self.seed % 2**64, self.stream_id % 2**64]))
        self.counter = 0

    def uniforms(self, count: int) -> np.ndarray:
        self.counter += int(count)
        return self._gen.random(int(count))

    def point(self, d: int) -> np.ndarray:
        if d < 1:
            raise ValueError("d must be >= 1")
        return self.uniforms(d)


def uniform_point(stream: SampleStream, d: int) -> np.ndarray:
    """d consecutive uniform [0,1) variates, advancing the stream."""
    return stream.point(d)


def _chunk_matrix(seed: int, chunk_index: int, rows: int, cols: int) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=[seed % 2**64, chunk_index % 2**64]))
    return gen.random(rows * cols).reshape(rows, cols)


def iter_uniform_chunks(seed: int, n: int, cols: int) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (row_offset, (m, cols) uniforms) in fixed CHUNK_ROWS blocks."""
    start = 0
    chunk = 0
    while start < n:
        rows = min(CHUNK_ROWS, n - start)
        yield start, _chunk_matrix(seed, chunk, rows, cols)
        start += rows
        chunk += 1


@lru_cache(maxsize=64)
def korobov_generator(n: int, d: int) -> tuple[int, ...]:
    """Deterministic Korobov generating vector (1, a, a^2, ...) mod n.

    The parameter ``a`` is chosen from a fixed golden-ratio-centred
    candidate set by minimizing the standard worst-case figure of the
    unweighted degree-2 Korobov space,
    e^2(a) = -1 + (1/n) sum_i prod_j (1 + 2 pi^2 B_2({i a^j / n})).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if d == 1 or n <= 2:
        return (1,) * d

    def candidates():
        centre = int(round(n * (math.sqrt(5) - 1) / 2)) % n
        seen = []
        for delta in range(-64, 65):
            a = (centre + delta) % n
            if 1 < a < n and math.gcd(a, n) == 1:
                seen.append(a)
        if not seen:
            seen = [a for a in range(2, n) if math.gcd(a, n) == 1][:64] or [1]
        return sorted(set(seen))

    i = np.arange(n, dtype=np.float64)
    best_a, best_err = 1, np.inf
    for a in candidates():
        g = 1
        err = np.ones(n)
        for _ in range(d):
            x = (i * g) % n / n
            err *= 1.0 + 2.0 * np.pi**2 * (x * x - x + 1.0 / 6.0)
            g = (g * a) % n
        e2 = err.mean() - 1.0
        if e2 < best_err:
            best_a, best_err = a, e2
    g, vec = 1, []
    for _ in range(d):
        vec.append(g)
        g = (g * best_a) % n
    return tuple(vec)


def lattice_point(index: int, n: int, d: int, shift=None) -> np.ndarray:
    """Rank-1 lattice point {index * g / n + shift}, coordinates in [0,1)."""
    if not 0 <= index < n:
        raise ValueError(f"index must be in 0..{n - 1}")
    g = np.asarray(korobov_generator(n, d), dtype=np.float64)
    x = index * g / n
    if shift is not None:
        x = x + np.asarray(shift, dtype=np.float64)
    x -= np.floor(x)
    return np.where(x == 1.0, 0.0, x)


def _lattice_chunks(seed: int, n: int, cols: int) -> Iterator[tuple[int, np.ndarray]]:
    g = np.asarray(korobov_generator(n, cols), dtype=np.float64)
    shift = SampleStream(seed, _SHIFT_STREAM).uniforms(cols)
    start = 0
    while start < n:
        rows = min(CHUNK_ROWS, n - start)
        idx = np.arange(start, start + rows, dtype=np.float64)[:, None]
        x = idx * g[None, :] / n + shift[None, :]
        x -= np.floor(x)
        yield start, np.where(x == 1.0, 0.0, x)
        start += rows


def _design_chunks(kind: str, seed: int, n: int, cols: int):
    if kind == "mc":
        return iter_uniform_chunks(seed, n, cols)
    if kind == "lattice":
        return _lattice_chunks(seed, n, cols)
    raise ValueError(f"unknown sampler kind {kind!r}")


@dataclass
class PickFreezeDesign:
    """Shared-block / complement-block design for the moment estimators.

    Per replicate the design generates ``|u| + p*d`` coordinates: one
    shared block for the coordinates in ``u`` plus p mutually independent
    full-dimensional complement blocks (the difference estimator also
    evaluates the bare complement points, so z blocks carry all d
    columns).  Rows are exposed lazily in chunks; ``x_blocks``/``z_blocks``
    materialize the full arrays.
    """

    seed: int
    n: int
    d: int
    p: int
    u: VarSubset
    kind: str = "mc"

    def __post_init__(self):
        if self.u.dim != self.d:
            raise ValueError("subset dimension does not match design dimension")
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        self._cols = len(self.u) + self.p * self.d
        self._materialized = None

    def iter_blocks(self) -> Iterator[tuple[int, np.ndarray, np.ndarray]]:
        """Yield (row_offset, x (m,|u|), z (m,p,d)) chunks."""
        k = len(self.u)
        for start, mat in _design_chunks(self.kind, self.seed, self.n, self._cols):
            x = mat[:, :k]
            z = mat[:, k:].reshape(mat.shape[0], self.p, self.d)
            yield start, x, z

    def _materialize(self):
        if self._materialized is None:
            xs = np.empty((self.n, len(self.u)))
            zs = np.empty((self.n, self.p, self.d))
            for start, x, z in self.iter_blocks():
                xs[start : start + x.shape[0]] = x
                zs[start : start + z.shape[0]] = z
            self._materialized = (xs, zs)
        return self._materialized

    @property
    def x_blocks(self) -> np.ndarray:
        return self._materialize()[0]

    @property
    def z_blocks(self) -> np.ndarray:
        return self._materialize()[1]


def build_pickfreeze(seed: int, n: int, d: int, p: int, u: VarSubset, kind: str = "mc") -> PickFreezeDesign:
    """Pick-freeze design; deterministic in (seed, n, d, p, u, kind)."""
    return PickFreezeDesign(seed=seed, n=n, d=d, p=p, u=u, kind=kind)


@dataclass
class SpectralDesign:
    """Block design for the multilinear (spectral) estimators.

    The coordinates in ``u`` get ``p`` blocks (``p - 1`` in the reduced
    form); the complement coordinates get ``p`` independent blocks.  Per
    replicate this is exactly ``p|u| + p(d-|u|)`` coordinates for the full
    form and ``(p-1)|u| + p(d-|u|)`` for the reduced one.
    """

    seed: int
    n: int
    d: int
    p: int
    u: VarSubset
    reduced: bool = False
    kind: str = "mc"

    def __post_init__(self):
        if self.u.dim != self.d:
            raise ValueError("subset dimension does not match design dimension")
        if self.p < 2:
            raise ValueError("p must be >= 2")
        self.u_blocks_per_rep = self.p - 1 if self.reduced else self.p
        self._cu = len(self.u)
        self._cc = self.d - self._cu
        self._cols = self.u_blocks_per_rep * self._cu + self.p * self._cc

    def iter_blocks(self) -> Iterator[tuple[int, np.ndarray, np.ndarray]]:
        """Yield (row_offset, u_blocks (m,q,|u|), comp_blocks (m,p,d-|u|))."""
        nu = self.u_blocks_per_rep * self._cu
        for start, mat in _design_chunks(self.kind, self.seed, self.n, self._cols):
            m = mat.shape[0]
            ub = mat[:, :nu].reshape(m, self.u_blocks_per_rep, self._cu)
            cb = mat[:, nu:].reshape(m, self.p, self._cc)
            yield start, ub, cb


def build_spectral_design(
    seed: int, n: int, d: int, p: int, u: VarSubset, reduced: bool = False, kind: str = "mc"
) -> SpectralDesign:
    return SpectralDesign(seed=seed, n=n, d=d, p=p, u=u, reduced=reduced, kind=kind)


def build_block_design(seed: int, n: int, d: int, p: int, kind: str = "mc") -> SpectralDesign:
    """p independent full-dimensional blocks per replicate (multilinear op)."""
    return SpectralDesign(seed=seed, n=n, d=d, p=p, u=VarSubset.full(d), reduced=False, kind=kind)
