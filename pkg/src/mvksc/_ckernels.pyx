# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled elementwise kernels for the A and C* updates.

Semantics (candidate sets, evaluation order, tie-breaks) mirror
``mvksc._pykernels`` exactly so both backends return identical bits.
"""
import numpy as np

from libc.math cimport fabs


cdef inline double _dl1_obj(double j, double y, double alpha, double beta,
                            double c) noexcept nogil:
    cdef double r = j - y
    return beta * fabs(j) + alpha * fabs(j - c) + 0.5 * r * r


cdef inline double _dl1(double y, double c, double alpha, double beta,
                        double s, double d) noexcept nogil:
    cdef double cand[6]
    cdef double best, best_obj, o, mag
    cdef int t
    if c == 0.0:
        # soft threshold, written as sign(y) * max(|y| - s, 0)
        mag = fabs(y) - s
        if mag <= 0.0:
            return 0.0
        return mag if y > 0.0 else -mag
    cand[0] = 0.0
    cand[1] = c
    cand[2] = y - s
    cand[3] = y + s
    cand[4] = y + d
    cand[5] = y - d
    best = 0.0
    best_obj = _dl1_obj(0.0, y, alpha, beta, c)
    for t in range(1, 6):
        o = _dl1_obj(cand[t], y, alpha, beta, c)
        if o < best_obj or (o == best_obj and fabs(cand[t]) < fabs(best)):
            best_obj = o
            best = cand[t]
    return best


def prox_double_l1_matrix(double[:, ::1] Y, double[:, ::1] C_star,
                          double alpha, double beta):
    """Entrywise minimizer of beta|j| + alpha|j - c*| + (j - y)^2 / 2."""
    cdef Py_ssize_t n = Y.shape[0], m = Y.shape[1], i, j
    out = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] J = out
    cdef double s = alpha + beta
    cdef double d = alpha - beta
    with nogil:
        for i in range(n):
            for j in range(m):
                J[i, j] = _dl1(Y[i, j], C_star[i, j], alpha, beta, s, d)
    return out


def consensus_l1_matrix(double[:, :, ::1] A, double[:, ::1] GQ, double lam):
    """Entrywise minimizer of gq|c| + sum_v 2 lam |a_v - c| over {0, a_1..a_v}.

    Candidates are visited as 0 first, then the a-values ordered by
    (|a|, a); the first strictly smallest objective wins.
    """
    cdef Py_ssize_t v = A.shape[0], n = A.shape[1], m = A.shape[2]
    cdef Py_ssize_t i, j, t, u, p
    out = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] Cs = out
    cdef double two_lam = 2.0 * lam
    cdef double gq, o, best, best_obj, x
    buf = np.empty(v, dtype=np.float64)
    cdef double[::1] srt = buf
    with nogil:
        for i in range(n):
            for j in range(m):
                gq = GQ[i, j]
                for t in range(v):
                    x = A[t, i, j]
                    p = t
                    while p > 0 and (fabs(srt[p - 1]) > fabs(x) or
                                     (fabs(srt[p - 1]) == fabs(x) and srt[p - 1] > x)):
                        srt[p] = srt[p - 1]
                        p -= 1
                    srt[p] = x
                best = 0.0
                best_obj = gq * fabs(0.0)
                for t in range(v):
                    best_obj = best_obj + two_lam * fabs(A[t, i, j] - 0.0)
                for u in range(v):
                    x = srt[u]
                    o = gq * fabs(x)
                    for t in range(v):
                        o = o + two_lam * fabs(A[t, i, j] - x)
                    if o < best_obj:
                        best_obj = o
                        best = x
                Cs[i, j] = best
    return out
