# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled pair-loop kernels.

Every routine here has a numpy twin in :mod:`mpca._fallback` with the same
signature and semantics; :mod:`mpca._backend` picks one at import time.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def pairwise_distances(const double[:, ::1] X):
    cdef Py_ssize_t n = X.shape[0], m = X.shape[1]
    cdef Py_ssize_t i, j, a
    cdef double acc, d
    out = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] D = out
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                acc = 0.0
                for a in range(m):
                    d = X[i, a] - X[j, a]
                    acc = acc + d * d
                acc = sqrt(acc)
                D[i, j] = acc
                D[j, i] = acc
    return out


def masked_scatter(const double[:, ::1] X, const double[:, ::1] D,
                   double lo, double hi):
    """Sum of (x_i - x_j)(x_i - x_j)^T over pairs i<j with lo <= D_ij <= hi.

    Computed as X^T (R X - W X) with R the row weight sums, so the pair loop
    costs O(m) per selected pair instead of O(m^2).
    """
    cdef Py_ssize_t n = X.shape[0], m = X.shape[1]
    cdef Py_ssize_t i, j, a, b
    cdef long count = 0
    cdef double dij, acc
    out = np.zeros((m, m), dtype=np.float64)
    cdef double[:, ::1] S = out
    z_arr = np.zeros((n, m), dtype=np.float64)
    cdef double[:, ::1] Z = z_arr
    r_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] R = r_arr
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                dij = D[i, j]
                if dij < lo or dij > hi:
                    continue
                count += 1
                R[i] += 1.0
                R[j] += 1.0
                for a in range(m):
                    Z[i, a] += X[j, a]
                    Z[j, a] += X[i, a]
        # Z <- R X - W X, row by row
        for i in range(n):
            for a in range(m):
                Z[i, a] = R[i] * X[i, a] - Z[i, a]
        for a in range(m):
            for b in range(a, m):
                acc = 0.0
                for i in range(n):
                    acc = acc + X[i, a] * Z[i, b] + X[i, b] * Z[i, a]
                S[a, b] = 0.5 * acc
                S[b, a] = S[a, b]
    return out, count


def masked_pair_sums(const double[:, ::1] Y, const double[:, ::1] D,
                     double lo, double hi):
    """Return (sum ||y_i - y_j||^2, sum D_ij^2, count) over in-range pairs."""
    cdef Py_ssize_t n = Y.shape[0], k = Y.shape[1]
    cdef Py_ssize_t i, j, a
    cdef long count = 0
    cdef double dij, d, acc
    cdef double num = 0.0, den = 0.0
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                dij = D[i, j]
                if dij < lo or dij > hi:
                    continue
                count += 1
                acc = 0.0
                for a in range(k):
                    d = Y[i, a] - Y[j, a]
                    acc = acc + d * d
                num += acc
                den += dij * dij
    return num, den, count


def count_in_range(const double[:, ::1] D, double lo, double hi):
    cdef Py_ssize_t n = D.shape[0]
    cdef Py_ssize_t i, j
    cdef long count = 0
    cdef double dij
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                dij = D[i, j]
                if dij >= lo and dij <= hi:
                    count += 1
    return count
