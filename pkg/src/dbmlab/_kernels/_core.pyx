# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled inner loops for the eigenvalue-flow integrators.

Mirrors ``dbmlab._kernels.fallback``; the drift accumulation exploits the
antisymmetry of the pair interaction, so it does half the divisions of the
numpy path and allocates nothing but the output.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def dbm_drift(const double[::1] x):
    cdef Py_ssize_t n = x.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.zeros(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t l, k
    cdef double inv
    for l in range(n):
        for k in range(l + 1, n):
            inv = 1.0 / (x[l] - x[k])
            o[l] += inv
            o[k] -= inv
    for l in range(n):
        o[l] = o[l] / n - 0.5 * x[l]
    return out


def dbm_drift_regularized(const double[::1] x_ref, const double[::1] xhat, double eps):
    cdef Py_ssize_t n = x_ref.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.zeros(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t j, k
    cdef double d
    for j in range(n):
        for k in range(j + 1, n):
            # row j, col k has j < k hence shift -eps; the transposed pair +eps
            d = x_ref[j] - x_ref[k]
            o[j] += 1.0 / (d - eps)
            o[k] += 1.0 / (-d + eps)
    for j in range(n):
        o[j] = o[j] / n - 0.5 * xhat[j]
    return out


def coupled_coefficient_matrix(const double[::1] x, const double[::1] y, double eps):
    cdef Py_ssize_t n = x.shape[0]
    cdef cnp.ndarray[double, ndim=2] out = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j
    cdef double dx, dy, b
    for i in range(n):
        for j in range(i + 1, n):
            # i < j: sign(i-j) = -1; the transposed pair flips both signs,
            # so the matrix is exactly symmetric.  The product is grouped
            # (dx*dy) first so that swapping the two flows reproduces the
            # coefficients bitwise.
            dx = x[i] - x[j] - eps
            dy = y[i] - y[j] - eps
            b = 1.0 / (n * (dx * dy))
            o[i, j] = b
            o[j, i] = b
    return out
