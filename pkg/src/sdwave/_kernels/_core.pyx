# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: one-sided exponential convolutions and a Thomas solve.

Contracts match `_ref`; selection happens at package import.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport exp, expm1, fabs

cnp.import_array()

BACKEND = "cython"


cdef inline void _cell_weights(double a, double h, double *c0, double *c1) nogil:
    cdef double z = a * h
    cdef double em, E
    if fabs(z) < 1e-3:
        c0[0] = h * (1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0)
        c1[0] = h * (0.5 + z / 3.0 + z * z / 8.0 + z * z * z / 30.0)
    else:
        em = expm1(z)
        E = em + 1.0
        c0[0] = em / a
        c1[0] = (h * E / a - em / (a * a)) / h


def exp_conv_pair(cnp.ndarray[cnp.float64_t, ndim=1] H, double h,
                  double g1, double g2, double h_left, double h_right):
    """Two-sided exponential convolution; see the fallback for the contract."""
    cdef Py_ssize_t n = H.shape[0]
    if n < 2:
        raise ValueError("need at least two grid samples")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] i_plus = np.empty(n, dtype=np.float64)
    cdef double c0 = 0.0, c1 = 0.0, d0 = 0.0, d1 = 0.0
    cdef double E1, E2, acc, inv
    cdef Py_ssize_t i
    with nogil:
        _cell_weights(g1, h, &c0, &c1)
        _cell_weights(-g2, h, &d0, &d1)
        E1 = exp(g1 * h)
        E2 = exp(-g2 * h)
        acc = h_left / (-g1)
        out[0] = acc
        for i in range(1, n):
            acc = E1 * acc + c1 * H[i - 1] + (c0 - c1) * H[i]
            out[i] = acc
        acc = h_right / g2
        i_plus[n - 1] = acc
        for i in range(n - 2, -1, -1):
            acc = E2 * acc + d1 * H[i + 1] + (d0 - d1) * H[i]
            i_plus[i] = acc
        inv = 1.0 / (g2 - g1)
        for i in range(n):
            out[i] = (out[i] + i_plus[i]) * inv
    return out


def solve_tridiagonal(cnp.ndarray[cnp.float64_t, ndim=1] lower,
                      cnp.ndarray[cnp.float64_t, ndim=1] diag,
                      cnp.ndarray[cnp.float64_t, ndim=1] upper,
                      cnp.ndarray[cnp.float64_t, ndim=1] rhs):
    """Thomas elimination; bands at offset one, inputs untouched."""
    cdef Py_ssize_t n = diag.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cp = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.empty(n, dtype=np.float64)
    cdef double denom
    cdef Py_ssize_t i
    with nogil:
        denom = diag[0]
        cp[0] = upper[0] / denom
        x[0] = rhs[0] / denom
        for i in range(1, n):
            denom = diag[i] - lower[i - 1] * cp[i - 1]
            if i < n - 1:
                cp[i] = upper[i] / denom
            x[i] = (rhs[i] - lower[i - 1] * x[i - 1]) / denom
        for i in range(n - 2, -1, -1):
            x[i] = x[i] - cp[i] * x[i + 1]
    return x
