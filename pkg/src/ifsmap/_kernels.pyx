# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same signatures as ``_kernels_py``.

The plane-wave sum is separable on a tensor lattice, so it is assembled from
per-axis phase tables and contracted over quadrature nodes with BLAS zgemm.
"""
import numpy as np
from libc.math cimport cos, sin, sqrt
from scipy.linalg.cython_blas cimport zgemm


cdef void _matmul(double complex* A, double complex* B, double complex* C,
                  int rows, int inner, int cols) noexcept nogil:
    # row-major C[rows, cols] = A[rows, inner] @ B[inner, cols]
    cdef char t = b'N'
    cdef double complex one = 1.0, zero = 0.0
    zgemm(&t, &t, &cols, &rows, &inner, &one, B, &cols, A, &inner, &zero, C, &cols)


cdef void _phase_table(const double[::1] axis, const double[:, ::1] th, int col, double lam,
                       double complex[:, ::1] out) noexcept nogil:
    # out[m, i] = exp(-i lam axis[i] th[m, col])
    cdef Py_ssize_t m, i
    cdef double k
    for m in range(th.shape[0]):
        k = lam * th[m, col]
        for i in range(axis.shape[0]):
            out[m, i] = cos(k * axis[i]) - 1j * sin(k * axis[i])


def herglotz_sum(axis, double lam, nodes, coeffs):
    cdef const double[::1] ax = np.ascontiguousarray(axis, dtype=np.float64)
    cdef const double[:, ::1] th = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef const double complex[::1] c = np.ascontiguousarray(coeffs, dtype=np.complex128)
    cdef int N = ax.shape[0], M = th.shape[0], n = th.shape[1]
    cdef Py_ssize_t m, i, j
    if M == 0:
        return np.zeros((N,) * n, dtype=np.complex128)
    cdef double complex[:, ::1] P1 = np.empty((M, N), dtype=np.complex128)
    cdef double complex[:, ::1] P2 = np.empty((M, N), dtype=np.complex128)
    cdef double complex[:, ::1] A = np.empty((N, M), dtype=np.complex128)
    cdef double complex[:, ::1] P3
    cdef double complex[:, ::1] T
    cdef double complex[:, ::1] o2
    cdef double complex[:, :, ::1] o3
    with nogil:
        _phase_table(ax, th, 0, lam, P1)
        _phase_table(ax, th, 1, lam, P2)
        for i in range(N):
            for m in range(M):
                A[i, m] = c[m] * P1[m, i]
    if n == 2:
        out = np.empty((N, N), dtype=np.complex128)
        o2 = out
        with nogil:
            _matmul(&A[0, 0], &P2[0, 0], &o2[0, 0], N, M, N)
        return out
    P3 = np.empty((M, N), dtype=np.complex128)
    T = np.empty((N, M), dtype=np.complex128)
    out = np.empty((N, N, N), dtype=np.complex128)
    o3 = out
    with nogil:
        _phase_table(ax, th, 2, lam, P3)
        for i in range(N):
            for j in range(N):
                for m in range(M):
                    T[j, m] = A[i, m] * P2[m, j]
            _matmul(&T[0, 0], &P3[0, 0], &o3[i, 0, 0], N, M, N)
    return out


def annulus_reduce(values, labels, Py_ssize_t nbins):
    cdef const double complex[::1] v = np.ascontiguousarray(values, dtype=np.complex128).ravel()
    cdef const long long[::1] lab = np.ascontiguousarray(labels, dtype=np.longlong).ravel()
    sumsq = np.zeros(nbins)
    peak = np.zeros(nbins)
    cdef double[::1] s = sumsq
    cdef double[::1] pk = peak
    cdef Py_ssize_t i, j
    cdef double re, im, a2
    with nogil:
        for i in range(v.shape[0]):
            j = lab[i]
            re = v[i].real
            im = v[i].imag
            a2 = re * re + im * im
            s[j] += a2
            if a2 > pk[j]:
                pk[j] = a2
        for j in range(nbins):
            pk[j] = sqrt(pk[j])
    return sumsq, peak
