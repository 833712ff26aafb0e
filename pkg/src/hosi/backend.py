"""Kernel backend selection: compiled extension when available, numpy otherwise.

The compiled module accelerates the scalar-loop kernels (compensated
summation, base-b digit encode/decode).  Everything numpy already handles
in single vectorized passes stays in ``_kernels_py`` for both backends.
Set ``HOSI_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py as _py

HAVE_COMPILED = False
_impl = _py

if not os.environ.get("HOSI_PURE_PYTHON"):
    try:
        from . import _kernels as _c  # type: ignore[attr-defined]

        _impl = _c
        HAVE_COMPILED = True
    except ImportError:
        pass

# Switchable kernels.
kahan_sum = _impl.kahan_sum
kahan_mean = _impl.kahan_mean
encode_digits = _impl.encode_digits
decode_digits = _impl.decode_digits

# Vectorized kernels shared by both backends.
default_precision = _py.default_precision
digit_add = _py.digit_add
digit_sub = _py.digit_sub
digit_neg = _py.digit_neg
frac_unit = _py.frac_unit
frac_cyclic_diff = _py.frac_cyclic_diff
frac_alt_sum = _py.frac_alt_sum
digit_cyclic_diff = _py.digit_cyclic_diff
digit_alt_sum = _py.digit_alt_sum
bits_encode = _py.bits_encode
bits_decode = _py.bits_decode
bits_cyclic_diff = _py.bits_cyclic_diff
bits_alt_sum = _py.bits_alt_sum

BACKEND = "compiled" if HAVE_COMPILED else "numpy"
