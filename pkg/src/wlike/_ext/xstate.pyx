# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Devetak-Winter evaluation for two-qubit X states."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log2

cnp.import_array()


cdef inline double xlogx(double x) nogil:
    if x <= 0.0:
        return 0.0
    return x * log2(x)


def xstate_dw(double[::1] a, double[::1] b, double[::1] c, double[::1] d):
    cdef Py_ssize_t n = a.shape[0]
    if b.shape[0] != n or c.shape[0] != n or d.shape[0] != n:
        raise ValueError("input arrays differ in length")
    i_ab_arr = np.empty(n, dtype=np.float64)
    i_ae_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] i_ab = i_ab_arr
    cdef double[::1] i_ae = i_ae_arr
    cdef Py_ssize_t k
    cdef double aa, bb, cc, dd, tot, ab, bd, lo
    with nogil:
        for k in range(n):
            tot = a[k] + 2.0 * b[k] + d[k]
            aa = a[k] / tot
            bb = b[k] / tot
            cc = c[k] / tot
            if cc < 0.0:
                cc = -cc
            dd = d[k] / tot
            ab = aa + bb
            bd = bb + dd
            lo = bb - cc
            if lo < 0.0:
                lo = 0.0
            i_ab[k] = xlogx(aa) + 2.0 * xlogx(bb) + xlogx(dd) - 2.0 * (xlogx(ab) + xlogx(bd))
            i_ae[k] = 2.0 * xlogx(bb) - xlogx(bb + cc) - xlogx(lo) - xlogx(ab) - xlogx(bd)
    return i_ab_arr, i_ae_arr
