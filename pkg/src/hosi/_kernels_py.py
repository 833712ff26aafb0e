"""Pure-numpy implementations of the hot kernels.

These are the reference implementations of the routines that the optional
compiled extension (``hosi._kernels``) accelerates:

* compensated summation of per-replicate contribution arrays,
* base-b digit encoding/decoding of points in [0,1),
* digit-wise modular arithmetic (no carries) on digit arrays.

Digit conventions
-----------------
A coordinate x in [0,1) is first truncated (never rounded) to 53 binary
digits, which is exact for any float64 in [0.5, 1) and loses at most one
unit in the last place otherwise.  Base-b digits are then extracted with
exact 64-bit integer arithmetic, so the digit expansion is the canonical
truncated expansion of the stored value and can never end in an infinite
tail of (b-1) digits.  ``default_precision(b)`` digits are enough to
round-trip real -> digits -> real to within one float64 ulp.
"""

from __future__ import annotations

import math

import numpy as np

_SCALE_BITS = 53
_SCALE = 1 << _SCALE_BITS
_MASK = _SCALE - 1


def default_precision(base: int) -> int:
    """Number of base-b digits carried by default: ceil(52 / log2(b))."""
    if base < 2:
        raise ValueError("base must be >= 2")
    return math.ceil(52.0 / math.log2(base))


def kahan_sum(values) -> float:
    """Compensated sum of a 1-d float array.

    The fallback delegates to ``math.fsum``, which is exactly rounded and
    therefore at least as accurate as the compiled Neumaier loop.
    """
    return math.fsum(np.asarray(values, dtype=np.float64))


def kahan_mean(values) -> float:
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("mean of empty array")
    return kahan_sum(values) / values.size


def encode_digits(x, base: int, ndigits: int) -> np.ndarray:
    """Truncated base-b digits of each entry of ``x`` (values in [0,1)).

    Returns a uint8 array of shape ``x.shape + (ndigits,)``.
    """
    x = np.asarray(x, dtype=np.float64)
    if np.any((x < 0.0) | (x >= 1.0)):
        raise ValueError("digit encoding requires coordinates in [0,1)")
    m = np.floor(x * _SCALE).astype(np.uint64)
    out = np.empty(x.shape + (ndigits,), dtype=np.uint8)
    b = np.uint64(base)
    mask = np.uint64(_MASK)
    shift = np.uint64(_SCALE_BITS)
    for i in range(ndigits):
        m = m * b
        out[..., i] = (m >> shift).astype(np.uint8)
        m = m & mask
    return out


def decode_digits(digits, base: int) -> np.ndarray:
    """Reals represented by base-b digit arrays (last axis = digit index)."""
    digits = np.asarray(digits, dtype=np.uint64)
    ndigits = digits.shape[-1]
    v = np.zeros(digits.shape[:-1], dtype=np.uint64)
    b = np.uint64(base)
    for i in range(ndigits):
        v = v * b + digits[..., i]
    return np.asarray(v, dtype=np.float64) / float(base**ndigits)


def digit_add(a, b, base: int) -> np.ndarray:
    """Digit-wise sum mod base, no carries."""
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8)
    return ((a.astype(np.uint16) + b) % base).astype(np.uint8)


def digit_sub(a, b, base: int) -> np.ndarray:
    """Digit-wise difference mod base, no carries."""
    a = np.asarray(a, dtype=np.uint16)
    b = np.asarray(b, dtype=np.uint16)
    return ((a + base - b) % base).astype(np.uint8)


def digit_neg(a, base: int) -> np.ndarray:
    a = np.asarray(a, dtype=np.uint16)
    return ((base - a) % base).astype(np.uint8)


def frac_unit(r: np.ndarray) -> np.ndarray:
    """Fractional part mapped into [0,1) with the exact-1.0 guard."""
    r = r - np.floor(r)
    return np.where(r == 1.0, 0.0, r)


def frac_cyclic_diff(blocks: np.ndarray) -> np.ndarray:
    """Cyclic differences {(-1)^j (x_j - x_{j+})} along axis 1.

    ``blocks`` has shape (n, p, m); block j is paired with its cyclic
    successor j+ = (j+1) mod p.  The difference of two [0,1) coordinates
    lies in (-1,1), so the fractional part is computed as ``r + 1`` when
    negative, with an exact result of 1.0 mapped back to 0.0.
    """
    p = blocks.shape[1]
    out = np.empty_like(blocks)
    for j in range(p):
        succ = (j + 1) % p
        if j % 2 == 0:
            r = blocks[:, j, :] - blocks[:, succ, :]
        else:
            r = blocks[:, succ, :] - blocks[:, j, :]
        r = np.where(r < 0.0, r + 1.0, r)
        out[:, j, :] = np.where(r == 1.0, 0.0, r)
    return out


def frac_alt_sum(blocks: np.ndarray) -> np.ndarray:
    """Alternating sum {y_0 - y_1 + y_2 - ...} along axis 1, in [0,1)."""
    q = blocks.shape[1]
    signs = np.where(np.arange(q) % 2 == 0, 1.0, -1.0)
    s = np.tensordot(blocks, signs, axes=([1], [0]))
    return frac_unit(s)


def digit_cyclic_diff(blocks: np.ndarray, base: int) -> np.ndarray:
    """Walsh analogue of ``frac_cyclic_diff`` on digit arrays.

    ``blocks`` has shape (n, p, m, t).  Entry j is
    ``(neg 1)^j (x_j digit-minus x_{j+})``: the plain digit difference for
    even j and its digit-wise negation for odd j.
    """
    p = blocks.shape[1]
    out = np.empty_like(blocks)
    for j in range(p):
        succ = (j + 1) % p
        d = digit_sub(blocks[:, j], blocks[:, succ], base)
        if j % 2 == 1:
            d = digit_neg(d, base)
        out[:, j] = d
    return out


def digit_alt_sum(blocks: np.ndarray, base: int) -> np.ndarray:
    """Alternating digit sum y_0 (-) y_1 (+) y_2 ... along axis 1."""
    q = blocks.shape[1]
    s = blocks[:, 0]
    for i in range(1, q):
        if i % 2 == 1:
            s = digit_sub(s, blocks[:, i], base)
        else:
            s = digit_add(s, blocks[:, i], base)
    return s


# Base-2 fast path: 52 binary digits packed in a uint64; digit-wise
# subtraction, addition and negation all collapse to XOR / identity.

_BITS2 = 52
_SCALE2 = float(1 << _BITS2)


def bits_encode(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if np.any((x < 0.0) | (x >= 1.0)):
        raise ValueError("bit encoding requires coordinates in [0,1)")
    return np.floor(x * _SCALE2).astype(np.uint64)


def bits_decode(k) -> np.ndarray:
    return np.asarray(k, dtype=np.float64) / _SCALE2


def bits_cyclic_diff(blocks: np.ndarray) -> np.ndarray:
    """Base-2 cyclic differences: XOR with the cyclic successor."""
    return blocks ^ np.roll(blocks, -1, axis=1)


def bits_alt_sum(blocks: np.ndarray) -> np.ndarray:
    """Base-2 alternating sum: XOR of all blocks along axis 1."""
    return np.bitwise_xor.reduce(blocks, axis=1)
