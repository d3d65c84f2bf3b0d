# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the pointwise matrix multipliers.

Fused single-pass evaluation: no (N, 4, 4) multiplier array is ever
materialized.  Contracts match ``_multiplier_py``.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def symbol_apply(const double complex[:, :, ::1] mats,
                 const double[:, ::1] xi,
                 double complex shift,
                 const double complex[:, ::1] f):
    """(L(xi) + shift I) f  per row, L(xi) = xi.alpha + beta."""
    cdef Py_ssize_t n = f.shape[0]
    out_arr = np.empty((n, 4), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    cdef Py_ssize_t i, a, b
    cdef double x0, x1, x2
    cdef double complex acc
    for i in range(n):
        x0 = xi[i, 0]
        x1 = xi[i, 1]
        x2 = xi[i, 2]
        for a in range(4):
            acc = shift * f[i, a]
            for b in range(4):
                acc = acc + (x0 * mats[0, a, b] + x1 * mats[1, a, b]
                             + x2 * mats[2, a, b] + mats[3, a, b]) * f[i, b]
            out[i, a] = acc
    return out_arr


def resolvent_apply(const double complex[:, :, ::1] mats,
                    const double[:, ::1] xi,
                    double complex z,
                    const double complex[:, ::1] f):
    """(L(xi) + z I) f / (1 + |xi|^2 - z^2)  per row."""
    cdef Py_ssize_t n = f.shape[0]
    out_arr = np.empty((n, 4), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    cdef Py_ssize_t i, a, b
    cdef double x0, x1, x2
    cdef double complex acc, den, z2 = z * z
    for i in range(n):
        x0 = xi[i, 0]
        x1 = xi[i, 1]
        x2 = xi[i, 2]
        den = 1.0 + x0 * x0 + x1 * x1 + x2 * x2 - z2
        for a in range(4):
            acc = z * f[i, a]
            for b in range(4):
                acc = acc + (x0 * mats[0, a, b] + x1 * mats[1, a, b]
                             + x2 * mats[2, a, b] + mats[3, a, b]) * f[i, b]
            out[i, a] = acc / den
    return out_arr
