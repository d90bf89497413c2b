# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see _pykernels for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, sqrt

from .errors import NotPositiveDefinite

cnp.import_array()


def oblique_rank_update(const double[:, ::1] H, const double[::1] s,
                        const double[::1] y, const double[::1] v):
    cdef Py_ssize_t n = H.shape[0]
    cdef Py_ssize_t i, j
    cdef double c = 0.0, rho = 0.0, w = 0.0, acc, k, hij
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_arr = np.empty((n, n))
    cdef double[:, ::1] out = out_arr
    cdef double[::1] u = np.empty(n)

    for i in range(n):
        acc = 0.0
        for j in range(n):
            acc += H[i, j] * y[j]
        u[i] = acc
        c += y[i] * v[i]
        rho += y[i] * s[i]
    for i in range(n):
        w += y[i] * u[i]
    k = w / (c * c)
    for i in range(n):
        for j in range(i, n):
            hij = 0.5 * (H[i, j] + H[j, i])
            hij = hij - (u[i] * v[j] + v[i] * u[j]) / c
            hij = hij + k * (v[i] * v[j])
            hij = hij + (s[i] * s[j]) / rho
            out[i, j] = hij
            out[j, i] = hij
    return out_arr


def two_loop(const double[:, ::1] S, const double[:, ::1] Y,
             const double[:, ::1] V, const double[::1] g, double gamma):
    cdef Py_ssize_t m = S.shape[0]
    cdef Py_ssize_t n = g.shape[0]
    cdef Py_ssize_t i, j
    cdef double a, b, rho, c
    cdef cnp.ndarray[cnp.float64_t, ndim=1] r_arr = np.empty(n)
    cdef double[::1] r = r_arr
    cdef double[::1] q = np.array(g, dtype=np.float64, copy=True)
    cdef double[::1] beta = np.empty(m)
    cdef double[::1] rhos = np.empty(m)
    cdef double[::1] cs = np.empty(m)

    for i in range(m):
        rho = 0.0
        c = 0.0
        for j in range(n):
            rho += S[i, j] * Y[i, j]
            c += V[i, j] * Y[i, j]
        rhos[i] = rho
        cs[i] = c
    for i in range(m - 1, -1, -1):
        a = 0.0
        b = 0.0
        for j in range(n):
            a += S[i, j] * q[j]
            b += V[i, j] * q[j]
        beta[i] = a / rhos[i]
        b = b / cs[i]
        for j in range(n):
            q[j] -= Y[i, j] * b
    for j in range(n):
        r[j] = gamma * q[j]
    for i in range(m):
        b = 0.0
        for j in range(n):
            b += Y[i, j] * r[j]
        b = b / cs[i]
        for j in range(n):
            r[j] += S[i, j] * beta[i] - V[i, j] * b
    return r_arr


cdef int _cholesky(double[:, ::1] A, Py_ssize_t n) nogil:
    # in-place lower Cholesky; returns 0 on success
    cdef Py_ssize_t i, j, k
    cdef double acc
    for j in range(n):
        acc = A[j, j]
        for k in range(j):
            acc -= A[j, k] * A[j, k]
        if not acc > 0.0:
            return 1
        A[j, j] = sqrt(acc)
        for i in range(j + 1, n):
            acc = A[i, j]
            for k in range(j):
                acc -= A[i, k] * A[j, k]
            A[i, j] = acc / A[j, j]
    return 0


def gauss_kl(pnat, qnat):
    cdef double[:, ::1] Lp = np.array(pnat, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] Lq = np.array(qnat, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = Lp.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double ldp = 0.0, ldq = 0.0, tr = 0.0, acc
    cdef double[::1] x = np.empty(n)

    if _cholesky(Lp, n) != 0 or _cholesky(Lq, n) != 0:
        raise NotPositiveDefinite("matrix is not positive definite")
    for i in range(n):
        ldp += log(Lp[i, i])
        ldq += log(Lq[i, i])
    # column j of Lp^-1 Lq by forward substitution; Lq is lower so rows < j vanish
    for j in range(n):
        for i in range(n):
            if i < j:
                x[i] = 0.0
                continue
            acc = Lq[i, j]
            for k in range(j, i):
                acc -= Lp[i, k] * x[k]
            x[i] = acc / Lp[i, i]
            tr += x[i] * x[i]
    return 0.5 * (2.0 * ldp - 2.0 * ldq + tr - n)
