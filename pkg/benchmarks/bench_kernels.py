"""Benchmark the compiled kernels against the pure-numpy fallbacks.

Times the switchable kernels (compensated sum, base-b digit encode and
decode) and one end-to-end Walsh index estimate with each backend.  Run
after building the extension:

    python benchmarks/bench_kernels.py [n]
"""

import sys
import time

import numpy as np

from hosi import GridFunction, VarSubset, backend, build_spectral_design
from hosi import _kernels_py as kpy
from hosi.walsh import estimate_walsh_index

try:
    from hosi import _kernels as kc
except ImportError:
    kc = None


def timeit(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def row(name, py_time, c_time):
    speedup = "" if c_time is None else f"{py_time / c_time:6.1f}x"
    c_text = "   (not built)" if c_time is None else f"{c_time * 1e3:10.2f} ms"
    print(f"{name:<28} {py_time * 1e3:10.2f} ms {c_text} {speedup}")


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 2_000_000
    rng = np.random.default_rng(0)
    x = rng.random(n)
    print(f"kernel benchmark, n = {n:,} (best of 5)\n")
    print(f"{'kernel':<28} {'numpy':>13} {'compiled':>13} {'speedup':>8}")

    row("kahan_sum", timeit(kpy.kahan_sum, x), timeit(kc.kahan_sum, x) if kc else None)
    for base in (2, 3):
        t = kpy.default_precision(base)
        row(
            f"encode_digits (b={base}, t={t})",
            timeit(kpy.encode_digits, x, base, t),
            timeit(kc.encode_digits, x, base, t) if kc else None,
        )
        digits = kpy.encode_digits(x, base, t)
        row(
            f"decode_digits (b={base})",
            timeit(kpy.decode_digits, digits, base),
            timeit(kc.decode_digits, digits, base) if kc else None,
        )

    # end to end: base-3 Walsh index estimate on a 9-cell grid function
    grid = GridFunction.from_array(rng.normal(size=9))
    f = grid.function()
    u = VarSubset.full(1)
    design = build_spectral_design(seed=1, n=min(n, 200_000), d=1, p=4, u=u)

    def run():
        estimate_walsh_index(f, u, 4, 3, design)

    saved = (backend.kahan_sum, backend.kahan_mean, backend.encode_digits, backend.decode_digits)
    try:
        backend.kahan_sum, backend.kahan_mean = kpy.kahan_sum, kpy.kahan_mean
        backend.encode_digits, backend.decode_digits = kpy.encode_digits, kpy.decode_digits
        t_py = timeit(run, repeat=3)
        t_c = None
        if kc is not None:
            backend.kahan_sum, backend.kahan_mean = kc.kahan_sum, kc.kahan_mean
            backend.encode_digits, backend.decode_digits = kc.encode_digits, kc.decode_digits
            t_c = timeit(run, repeat=3)
    finally:
        backend.kahan_sum, backend.kahan_mean, backend.encode_digits, backend.decode_digits = saved
    row("walsh estimate (b=3, end2end)", t_py, t_c)


if __name__ == "__main__":
    main()
