# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the join inner loops; see kernels.py for the contracts."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint8_t, uint64_t

cnp.import_array()


def conv_rows(const int64_t[:, ::1] a, const int64_t[:, ::1] b):
    cdef Py_ssize_t rows = a.shape[0], la = a.shape[1], lb = b.shape[1]
    out_arr = np.zeros((rows, la + lb - 1), dtype=np.int64)
    cdef int64_t[:, ::1] out = out_arr
    cdef Py_ssize_t x, i, j
    cdef int64_t v
    with nogil:
        for x in range(rows):
            for i in range(la):
                v = a[x, i]
                if v == 0:
                    continue
                for j in range(lb):
                    out[x, i + j] += v * b[x, j]
    return out_arr


def conv2_mod2(const uint8_t[:, :, ::1] a, const uint8_t[:, :, ::1] b):
    """GF(2) 2-D convolution per row, truncated; the W axis is bit-packed."""
    cdef Py_ssize_t rows = a.shape[0], T = a.shape[1], W = a.shape[2]
    cdef Py_ssize_t words = (W + 63) // 64
    cdef Py_ssize_t x, t1, t2, w1, w, q, sh, k
    cdef uint64_t[:, ::1] bp = np.zeros((T, words + 1), dtype=np.uint64)
    cdef uint64_t[:, ::1] acc = np.zeros((T, words + 1), dtype=np.uint64)
    cdef uint64_t lo, carry
    out_arr = np.zeros((rows, T, W), dtype=np.uint8)
    cdef uint8_t[:, :, ::1] out = out_arr
    with nogil:
        for x in range(rows):
            for t2 in range(T):
                for k in range(words + 1):
                    bp[t2, k] = 0
                    acc[t2, k] = 0
                for w in range(W):
                    if b[x, t2, w] & 1:
                        bp[t2, w >> 6] |= (<uint64_t>1) << (w & 63)
            for t1 in range(T):
                for w1 in range(W):
                    if not (a[x, t1, w1] & 1):
                        continue
                    q = w1 >> 6
                    sh = w1 & 63
                    for t2 in range(T - t1):
                        carry = 0
                        for k in range(words - q):
                            lo = bp[t2, k]
                            if sh:
                                acc[t1 + t2, k + q] ^= (lo << sh) | carry
                                carry = lo >> (64 - sh)
                            else:
                                acc[t1 + t2, k + q] ^= lo
            for t2 in range(T):
                for w in range(W):
                    out[x, t2, w] = (acc[t2, w >> 6] >> (w & 63)) & 1
    return out_arr
