"""Closed-form elementwise minimizers used by the A and C* updates.

Two nonsmooth scalar problems appear in the solver:

* the double-l1 proximal problem
  ``min_j  beta|j| + alpha|j - c*| + (j - y)^2 / 2``   (A update), and
* the consensus problem
  ``min_c  gamma q |c| + sum_v 2 lam |a_v - c|``       (C* update).

Scalar functions here are the readable reference; the matrix wrappers
dispatch to the compiled kernels (or their numpy twin) in ``_backend``.
"""
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from mvksc import _backend


@dataclass(frozen=True)
class DoubleL1Params:
    y: float
    alpha: float
    beta: float
    c_star: float

    def __post_init__(self):
        for name in ("y", "alpha", "beta", "c_star"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be nonnegative")


@dataclass(frozen=True)
class ConsensusParams:
    a_values: Sequence[float]
    q: float
    lam: float
    gamma: float

    def __post_init__(self):
        if len(self.a_values) == 0:
            raise ValueError("a_values must hold one entry per view")
        if not all(math.isfinite(a) for a in self.a_values):
            raise ValueError("a_values must be finite")
        if self.q < 0 or self.gamma < 0 or self.lam < 0:
            raise ValueError("q, gamma and lam must be nonnegative")


def soft_threshold(y, t):
    """``sign(y) * max(|y| - t, 0)``; works on scalars and arrays."""
    return np.sign(y) * np.maximum(np.abs(y) - t, 0.0)


def double_l1_objective(j, y, alpha, beta, c_star):
    r = j - y
    return beta * np.abs(j) + alpha * np.abs(j - c_star) + 0.5 * r * r


def prox_double_l1(p: DoubleL1Params) -> float:
    """Global minimizer of ``beta|j| + alpha|j - c*| + (j - y)^2 / 2``.

    The objective is strictly convex and piecewise quadratic with kinks at 0
    and c*, so its minimizer is either a stationary point of one piece
    (``y -/+ (alpha + beta)``, ``y +/- (alpha - beta)``) or one of the kinks.
    All six candidates are scored and the best kept; ties go to the smaller
    magnitude. With ``c* = 0`` this is plain soft thresholding.
    """
    y, a, b, c = p.y, p.alpha, p.beta, p.c_star
    return float(_backend.prox_double_l1_matrix(
        np.array([[y]], dtype=np.float64), np.array([[c]], dtype=np.float64), a, b
    )[0, 0])


def prox_double_l1_cases(p: DoubleL1Params):
    """Casework form of the double-l1 minimizer for ``c* != 0``.

    Returns ``(value, case)`` where ``case`` is 1..6 for the six interior
    pieces or ``"kink"`` when none applies. In the kink region the minimizer
    is whichever of ``{0, c*}`` scores lower; reading that region as a plain
    zero would be wrong whenever ``y`` sits close enough to ``c*``.
    """
    y, a, b, c = p.y, p.alpha, p.beta, p.c_star
    if c > 0:
        if y >= a + b + c:
            return y - a - b, 1
        if 0 < y + a - b < c:
            return y + a - b, 2
        if 0 >= y + a + b:
            return y + a + b, 3
    elif c < 0:
        if y >= a + b:
            return y - a - b, 4
        if 0 > y - a + b > c:
            return y - a + b, 5
        if c >= y + a + b:
            return y + a + b, 6
    else:
        return float(soft_threshold(y, a + b)), 0
    f0 = double_l1_objective(0.0, y, a, b, c)
    fc = double_l1_objective(c, y, a, b, c)
    return (0.0 if f0 <= fc else c), "kink"


def consensus_objective(c, a_values, q, lam, gamma):
    two_lam = 2.0 * lam
    f = (gamma * q) * abs(c)
    for a in a_values:
        f = f + two_lam * abs(float(a) - c)
    return f


def consensus_scalar(p: ConsensusParams) -> float:
    """Global minimizer of ``gamma q |c| + sum_v 2 lam |a_v - c|``.

    The objective is piecewise linear with kinks only at 0 and the ``a_v``,
    so enumerating those points is exact. Ties go to 0, then to the smallest
    ``|c|``.
    """
    cands = [0.0] + sorted(float(a) for a in p.a_values)
    cands.sort(key=lambda x: (x != 0.0, abs(x), x))
    best, best_obj = cands[0], consensus_objective(cands[0], p.a_values, p.q, p.lam, p.gamma)
    for c in cands[1:]:
        f = consensus_objective(c, p.a_values, p.q, p.lam, p.gamma)
        if f < best_obj:
            best, best_obj = c, f
    return best


def consensus_closed_form(p: ConsensusParams) -> float:
    """Ceiling-index (weighted median) solution of the consensus problem.

    With the a-values sorted ascending as ``a_1..a_v``::

        a_i, i = ceil((2 v lam - gamma q) / (4 lam)), if 2 v lam > gamma q and a_i > 0
        a_i, i = ceil((2 v lam + gamma q) / (4 lam)), if 2 v lam > gamma q and a_i < 0
        0 otherwise

    Fast path only; ``consensus_scalar`` is authoritative and the two agree in
    objective value.
    """
    a = sorted(float(x) for x in p.a_values)
    v = len(a)
    gq = p.gamma * p.q
    if p.lam <= 0 or not 2 * v * p.lam > gq:
        return 0.0
    lo = math.ceil((2 * v * p.lam - gq) / (4 * p.lam))
    hi = math.ceil((2 * v * p.lam + gq) / (4 * p.lam))
    if 1 <= lo <= v and a[lo - 1] > 0:
        return a[lo - 1]
    if 1 <= hi <= v and a[hi - 1] < 0:
        return a[hi - 1]
    return 0.0


def update_A(C, Sigma, C_star, rho, theta, lam):
    """A = J - diag(J) with J the entrywise double-l1 prox of ``C + Sigma/rho``.

    ``alpha = lam / rho`` pulls toward the consensus, ``beta = theta / rho``
    toward zero.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    Y = np.asarray(C, dtype=np.float64) + np.asarray(Sigma, dtype=np.float64) / rho
    C_star = np.asarray(C_star, dtype=np.float64)
    if Y.shape != C_star.shape:
        raise ValueError("shape mismatch between C and C_star")
    if not (np.all(np.isfinite(Y)) and np.all(np.isfinite(C_star))):
        raise FloatingPointError("non-finite input to the A update")
    A = _backend.prox_double_l1_matrix(Y, C_star, lam / rho, theta / rho)
    np.fill_diagonal(A, 0.0)
    return A


def update_A_frobenius(C, Sigma, C_star, rho, theta, lam):
    """A update when the consensus penalty is ``lam ||A - C*||_F^2``.

    Entrywise ``min beta|j| + alpha (j - c*)^2 + (j - y)^2 / 2`` has the
    closed form ``soft((y + 2 alpha c*) / (1 + 2 alpha), beta / (1 + 2 alpha))``.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    Y = np.asarray(C, dtype=np.float64) + np.asarray(Sigma, dtype=np.float64) / rho
    alpha, beta = lam / rho, theta / rho
    A = soft_threshold((Y + 2 * alpha * C_star) / (1 + 2 * alpha), beta / (1 + 2 * alpha))
    np.fill_diagonal(A, 0.0)
    return A


def _stack_views(A_views):
    if len(A_views) == 0:
        raise ValueError("need at least one view")
    A = np.ascontiguousarray(np.stack([np.asarray(a, dtype=np.float64) for a in A_views]))
    if A.ndim != 3 or A.shape[1] != A.shape[2]:
        raise ValueError("view matrices must be square and share one shape")
    return A


def update_C_star(A_views, Q, lam, gamma):
    """Entrywise robust consensus of the per-view A matrices.

    Each entry solves ``min gamma Q(i,j) |c| + sum_v 2 lam |A_v(i,j) - c|``;
    the kernel receives the premultiplied product ``gamma * Q``. The diagonal
    is forced to zero to keep the affinity loopless.
    """
    A = _stack_views(A_views)
    Q = np.asarray(Q, dtype=np.float64)
    if Q.shape != A.shape[1:]:
        raise ValueError("Q must match the view shape")
    Cs = _backend.consensus_l1_matrix(A, np.ascontiguousarray(gamma * Q), lam)
    np.fill_diagonal(Cs, 0.0)
    return Cs


def update_C_star_frobenius(A_views, Q, lam, gamma):
    """Consensus under ``lam ||A_v - C*||_F^2``: a shrunk per-entry mean.

    ``min gamma q |c| + sum_v 2 lam (a_v - c)^2`` is solved by
    ``soft(mean(a), gamma q / (4 v lam))``.
    """
    A = _stack_views(A_views)
    v = A.shape[0]
    if lam <= 0:
        Cs = np.zeros(A.shape[1:])
    else:
        Cs = soft_threshold(A.mean(axis=0), gamma * np.asarray(Q) / (4 * v * lam))
    np.fill_diagonal(Cs, 0.0)
    return Cs
