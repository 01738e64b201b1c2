"""Affinity/Laplacian construction, the spectral embedding step, and k-means."""
from dataclasses import dataclass

import numpy as np
from sklearn.cluster import KMeans


@dataclass(frozen=True)
class Affinity:
    W: np.ndarray
    D: np.ndarray
    L: np.ndarray


@dataclass(frozen=True)
class Embedding:
    F: np.ndarray
    eigenvalues: np.ndarray


def affinity_from(C_star):
    """W = (|C*| + |C*|^T) / 2, D = diag(row sums of W), L = D - W."""
    C_star = np.asarray(C_star, dtype=np.float64)
    if C_star.ndim != 2 or C_star.shape[0] != C_star.shape[1]:
        raise ValueError("C* must be square")
    if not np.all(np.isfinite(C_star)):
        raise FloatingPointError("C* contains non-finite entries")
    absC = np.abs(C_star)
    W = (absC + absC.T) / 2
    np.fill_diagonal(W, 0.0)
    D = np.diag(W.sum(axis=1))
    return Affinity(W, D, D - W)


def laplacian(W):
    W = np.asarray(W, dtype=np.float64)
    return np.diag(W.sum(axis=1)) - W


def _fix_signs(V):
    # largest-magnitude entry of each column made positive; argmax takes the first on ties
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def update_F(L, k):
    """Eigenvectors of the ``k`` smallest eigenvalues of the Laplacian ``L``.

    Columns come in ascending eigenvalue order with a deterministic sign.
    An exactly zero ``L`` returns the first ``k`` canonical basis vectors.
    """
    L = np.asarray(L, dtype=np.float64)
    n = L.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    if not np.all(np.isfinite(L)):
        raise FloatingPointError("Laplacian contains non-finite entries")
    if not np.any(L):
        return Embedding(np.eye(n, k), np.zeros(k))
    w, V = np.linalg.eigh((L + L.T) / 2)
    return Embedding(_fix_signs(V[:, :k]), w[:k])


def pairwise_sq_dists(F):
    """Q(i, j) = ||f_i - f_j||^2 between rows of ``F``."""
    F = np.asarray(F, dtype=np.float64)
    sq = np.einsum("ij,ij->i", F, F)
    Q = sq[:, None] + sq[None, :] - 2.0 * (F @ F.T)
    np.maximum(Q, 0.0, out=Q)
    Q = (Q + Q.T) / 2
    np.fill_diagonal(Q, 0.0)
    return Q


def row_normalize(F):
    """Scale rows to unit norm; all-zero rows stay at the origin."""
    F = np.asarray(F, dtype=np.float64)
    norms = np.linalg.norm(F, axis=1, keepdims=True)
    return np.divide(F, norms, out=np.zeros_like(F), where=norms > 0)


def kmeans_labels(F, k, seed=0, n_init=20, max_iter=300):
    """Seeded k-means++ with restarts; best inertia wins.

    ``tol=0`` makes Lloyd iterations stop only at an assignment fixpoint (or
    the iteration cap).
    """
    F = np.asarray(F, dtype=np.float64)
    if k > F.shape[0]:
        raise ValueError(f"k={k} exceeds the number of samples {F.shape[0]}")
    km = KMeans(n_clusters=k, init="k-means++", n_init=n_init, max_iter=max_iter,
                tol=0.0, random_state=seed)
    return km.fit_predict(F).astype(np.int64)
