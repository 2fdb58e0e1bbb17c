# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: tridiagonal solve and fused planar log-diffusion step."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def tridiag_solve(const double[::1] sub, const double[::1] diag, const double[::1] sup, const double[::1] rhs):
    """Thomas algorithm. No pivoting: systems must be diagonally dominant."""
    cdef Py_ssize_t n = diag.shape[0]
    cdef cnp.ndarray[double, ndim=1] x_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] x = x_arr
    cdef cnp.ndarray[double, ndim=1] scratch = np.empty(n, dtype=np.float64)
    cdef double[::1] cp = scratch
    cdef Py_ssize_t i
    cdef double m

    m = diag[0]
    cp[0] = sup[0] / m
    x[0] = rhs[0] / m
    for i in range(1, n):
        m = diag[i] - sub[i - 1] * cp[i - 1]
        if i < n - 1:
            cp[i] = sup[i] / m
        x[i] = (rhs[i] - sub[i - 1] * x[i - 1]) / m
    for i in range(n - 2, -1, -1):
        x[i] = x[i] - cp[i] * x[i + 1]
    return x_arr


def planar_log_step(const double[:, ::1] v, double[:, ::1] out, double coef):
    """out = v + coef * five_point_laplacian(ln v) on interior; edges copied."""
    cdef Py_ssize_t ny = v.shape[0]
    cdef Py_ssize_t nx = v.shape[1]
    # vectorized log (SIMD) beats a scalar libm loop by a wide margin
    cdef cnp.ndarray[double, ndim=2] w_arr = np.log(np.asarray(v))
    cdef double[:, ::1] w = w_arr
    cdef Py_ssize_t i, j

    for i in range(nx):
        out[0, i] = v[0, i]
        out[ny - 1, i] = v[ny - 1, i]
    for j in range(ny):
        out[j, 0] = v[j, 0]
        out[j, nx - 1] = v[j, nx - 1]
    for j in range(1, ny - 1):
        for i in range(1, nx - 1):
            out[j, i] = v[j, i] + coef * (
                w[j + 1, i] + w[j - 1, i] + w[j, i + 1] + w[j, i - 1] - 4.0 * w[j, i]
            )
    return np.asarray(out)
