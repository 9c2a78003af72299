# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot numeric kernels.

Hash values are bit-identical to the pure NumPy twin in ``_pykernels``;
softmax rows agree to within a few ulps (libm vs NumPy exp).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp
from libc.stdint cimport uint64_t

cnp.import_array()

cdef extern from *:
    """
    static inline uint64_t agsum_mix64(uint64_t x) {
        uint64_t z = x + 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    """
    uint64_t agsum_mix64(uint64_t x) nogil

cdef double _INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


def hashed_uniform(key, shape):
    """Seeded uniform values in [0, 1), one per cell of ``shape``."""
    cdef uint64_t k = <uint64_t> (key & 0xFFFFFFFFFFFFFFFF)
    cdef Py_ssize_t n = 1
    for dim in shape:
        if dim < 0:
            raise ValueError(f"negative dimension in {shape!r}")
        n *= dim
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] view = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            view[i] = <double> (agsum_mix64(agsum_mix64(<uint64_t> (i + 1)) ^ k) >> 11) * _INV_2_53
    return out.reshape(tuple(shape))


def hashed_softmax_attention(key, heads, tokens):
    """Seeded row-stochastic attention tensor of shape (heads, tokens, tokens)."""
    cdef uint64_t k = <uint64_t> (key & 0xFFFFFFFFFFFFFFFF)
    cdef Py_ssize_t H = heads
    cdef Py_ssize_t T = tokens
    if H < 1 or T < 1:
        raise ValueError("heads and tokens must be positive")
    out = np.empty((H, T, T), dtype=np.float64)
    cdef double[:, :, ::1] w = out
    cdef Py_ssize_t h, i, j
    cdef uint64_t base
    cdef double m, s, v
    with nogil:
        for h in range(H):
            for i in range(T):
                base = (<uint64_t> (h * T + i)) * (<uint64_t> T)
                m = -1.0
                for j in range(T):
                    v = <double> (agsum_mix64(agsum_mix64(base + j + 1) ^ k) >> 11) * _INV_2_53
                    w[h, i, j] = v
                    if v > m:
                        m = v
                s = 0.0
                for j in range(T):
                    v = exp(w[h, i, j] - m)
                    w[h, i, j] = v
                    s += v
                for j in range(T):
                    w[h, i, j] /= s
    return out


def lcs_length(a, b):
    """Length of the longest common subsequence of two integer sequences."""
    cdef cnp.ndarray[cnp.int32_t, ndim=1] aa = np.ascontiguousarray(a, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] bb = np.ascontiguousarray(b, dtype=np.int32)
    cdef Py_ssize_t n = aa.shape[0]
    cdef Py_ssize_t m = bb.shape[0]
    if n == 0 or m == 0:
        return 0
    buf = np.zeros((2, m + 1), dtype=np.int32)
    cdef int[:, ::1] rows = buf
    cdef Py_ssize_t i, j, prv, cur
    cdef int x, best
    with nogil:
        for i in range(n):
            prv = i & 1
            cur = 1 - prv
            x = aa[i]
            rows[cur, 0] = 0
            for j in range(1, m + 1):
                if bb[j - 1] == x:
                    best = rows[prv, j - 1] + 1
                else:
                    best = rows[prv, j]
                if rows[cur, j - 1] > best:
                    best = rows[cur, j - 1]
                rows[cur, j] = best
    return int(buf[n & 1, m])
