# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: compensated summation and base-b digit codecs.

Single-pass replacements for the multi-pass numpy fallbacks in
``_kernels_py``; semantics are identical (same integer arithmetic, same
truncation convention), results match to within one float64 ulp.
"""

import math

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef extern from "math.h":
    double floor(double x) nogil

DEF SCALE_BITS = 53
cdef unsigned long long SCALE = (<unsigned long long>1) << SCALE_BITS
cdef unsigned long long MASK = SCALE - 1


def default_precision(int base):
    if base < 2:
        raise ValueError("base must be >= 2")
    return math.ceil(52.0 / math.log2(base))


def kahan_sum(values):
    """Neumaier-compensated sum of a float array."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.ascontiguousarray(values, dtype=np.float64).ravel()
    cdef double s = 0.0, c = 0.0, t, v
    cdef Py_ssize_t i, n = x.shape[0]
    with nogil:
        for i in range(n):
            v = x[i]
            t = s + v
            if (s if s >= 0 else -s) >= (v if v >= 0 else -v):
                c += (s - t) + v
            else:
                c += (v - t) + s
            s = t
    return s + c


def kahan_mean(values):
    arr = np.ascontiguousarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("mean of empty array")
    return kahan_sum(arr) / arr.size


def encode_digits(x, int base, int ndigits):
    """Truncated base-b digits of [0,1) values; shape x.shape + (ndigits,)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] flat = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t n = flat.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] out = np.empty((n, ndigits), dtype=np.uint8)
    cdef Py_ssize_t i, t
    cdef unsigned long long m, b = <unsigned long long>base
    cdef double v
    for i in range(n):
        v = flat[i]
        if v < 0.0 or v >= 1.0:
            raise ValueError("digit encoding requires coordinates in [0,1)")
        m = <unsigned long long>floor(v * SCALE)
        for t in range(ndigits):
            m = m * b
            out[i, t] = <unsigned char>(m >> SCALE_BITS)
            m = m & MASK
    shape = tuple(np.shape(x)) + (ndigits,)
    return np.asarray(out).reshape(shape)


def decode_digits(digits, int base):
    """Reals from base-b digit arrays (last axis = digit index)."""
    arr = np.ascontiguousarray(digits, dtype=np.uint8)
    cdef Py_ssize_t ndigits = arr.shape[arr.ndim - 1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] flat = arr.reshape(-1, ndigits)
    cdef Py_ssize_t n = flat.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef unsigned long long v, b = <unsigned long long>base
    cdef double den = float(base ** int(ndigits))
    cdef Py_ssize_t i, t
    with nogil:
        for i in range(n):
            v = 0
            for t in range(ndigits):
                v = v * b + flat[i, t]
            out[i] = (<double>v) / den
    return np.asarray(out).reshape(tuple(np.shape(digits))[:-1])
