"""Pure numpy implementation of the elementwise A and C* kernels.

Used when the compiled ``_ckernels`` extension is unavailable. Every
arithmetic expression is evaluated in the same order as the Cython code so
the two backends agree bit for bit.
"""
import numpy as np


def _dl1_obj(j, y, alpha, beta, c):
    r = j - y
    return beta * np.abs(j) + alpha * np.abs(j - c) + 0.5 * r * r


def prox_double_l1_matrix(Y, C_star, alpha, beta):
    """Entrywise minimizer of beta|j| + alpha|j - c*| + (j - y)^2 / 2."""
    Y = np.ascontiguousarray(Y, dtype=np.float64)
    C_star = np.ascontiguousarray(C_star, dtype=np.float64)
    s = alpha + beta
    d = alpha - beta

    best = np.zeros_like(Y)
    best_obj = _dl1_obj(best, Y, alpha, beta, C_star)
    for cand in (C_star, Y - s, Y + s, Y + d, Y - d):
        o = _dl1_obj(cand, Y, alpha, beta, C_star)
        upd = (o < best_obj) | ((o == best_obj) & (np.abs(cand) < np.abs(best)))
        best = np.where(upd, cand, best)
        best_obj = np.where(upd, o, best_obj)

    mag = np.abs(Y) - s
    soft = np.where(mag <= 0.0, 0.0, np.where(Y > 0.0, mag, -mag))
    return np.where(C_star == 0.0, soft, best)


def consensus_l1_matrix(A, GQ, lam):
    """Entrywise minimizer of gq|c| + sum_v 2 lam |a_v - c| over {0, a_1..a_v}."""
    A = np.ascontiguousarray(A, dtype=np.float64)
    GQ = np.ascontiguousarray(GQ, dtype=np.float64)
    v = A.shape[0]
    two_lam = 2.0 * lam

    # order candidates by (|a|, a), same as the insertion sort in _ckernels
    srt = np.sort(A, axis=0)
    order = np.argsort(np.abs(srt), axis=0, kind="stable")
    srt = np.take_along_axis(srt, order, axis=0)

    def objective(x):
        o = GQ * np.abs(x)
        for t in range(v):
            o = o + two_lam * np.abs(A[t] - x)
        return o

    best = np.zeros(A.shape[1:])
    best_obj = objective(0.0)
    for u in range(v):
        x = srt[u]
        o = objective(x)
        upd = o < best_obj
        best = np.where(upd, x, best)
        best_obj = np.where(upd, o, best_obj)
    return best
