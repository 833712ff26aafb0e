"""Shared Monte Carlo accumulation plumbing for the estimators.

Replicates are processed in the design's fixed chunks.  Each chunk's
contributions land in a preallocated slice and auxiliary reductions are
kept per chunk and folded in chunk order, so results are bit-identical
for a fixed seed regardless of worker count.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import backend


def run_chunks(design, chunk_fn, workers: int = 1):
    """Evaluate ``chunk_fn(start, *blocks) -> (contributions, aux)`` per chunk.

    Returns (contributions array of length design.n, list of aux in chunk
    order).  Chunks are streamed, so at most ``workers`` design chunks are
    in memory at once; with several workers chunks run concurrently but
    land in fixed slices, keeping results worker-count independent.
    """
    out = np.empty(design.n, dtype=np.float64)
    aux: list = []

    def work(args):
        start = args[0]
        contrib, extra = chunk_fn(*args)
        out[start : start + contrib.shape[0]] = contrib
        return extra

    blocks = design.iter_blocks()
    if workers <= 1:
        for args in blocks:
            aux.append(work(args))
        return out, aux
    with ThreadPoolExecutor(max_workers=workers) as pool:
        while True:
            wave = list(itertools.islice(blocks, workers))
            if not wave:
                break
            aux.extend(pool.map(work, wave))
    return out, aux


def mean_and_se(contributions: np.ndarray) -> tuple[float, float]:
    """Compensated mean and its standard error (sample SD / sqrt(n))."""
    n = contributions.shape[0]
    value = backend.kahan_mean(contributions)
    if n < 2:
        raise ValueError("standard errors require n >= 2 replicates")
    se = float(np.std(contributions, ddof=1)) / math.sqrt(n)
    return value, se


def combined_se(*ses: float) -> float:
    return math.sqrt(math.fsum(s * s for s in ses))
