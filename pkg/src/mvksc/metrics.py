"""Clustering accuracy (optimal label matching) and normalized mutual information."""
import numpy as np
from scipy.optimize import linear_sum_assignment

# NMI normalization convention, recorded in run outputs
NMI_NORMALIZATION = "geometric"


def _check_pair(pred, truth):
    pred = np.asarray(pred).ravel()
    truth = np.asarray(truth).ravel()
    if pred.shape != truth.shape:
        raise ValueError(f"label vectors differ in length: {pred.size} vs {truth.size}")
    if pred.size == 0:
        raise ValueError("empty label vectors")
    return pred, truth


def contingency(pred, truth):
    """Joint count matrix (pred clusters x truth classes)."""
    pred, truth = _check_pair(pred, truth)
    _, p = np.unique(pred, return_inverse=True)
    _, t = np.unique(truth, return_inverse=True)
    M = np.zeros((p.max() + 1, t.max() + 1), dtype=np.int64)
    np.add.at(M, (p, t), 1)
    return M


def accuracy(pred, truth):
    """Fraction of samples correctly clustered under the best one-to-one label map.

    The confusion matrix is zero-padded to square so predictions with fewer
    (or more) clusters than the ground truth are handled.
    """
    M = contingency(pred, truth)
    k = max(M.shape)
    padded = np.zeros((k, k), dtype=np.int64)
    padded[: M.shape[0], : M.shape[1]] = M
    rows, cols = linear_sum_assignment(padded, maximize=True)
    return padded[rows, cols].sum() / M.sum()


def _entropy(counts, n):
    p = counts[counts > 0] / n
    return float(-np.sum(p * np.log(p)))


def nmi(pred, truth):
    """I(pred; truth) / sqrt(H(pred) H(truth)), natural logs.

    Two single-cluster partitions are identical and score 1; a single-cluster
    partition against anything else scores 0.
    """
    M = contingency(pred, truth)
    n = M.sum()
    h_p = _entropy(M.sum(axis=1), n)
    h_t = _entropy(M.sum(axis=0), n)
    if h_p == 0.0 or h_t == 0.0:
        return 1.0 if M.shape == (1, 1) else 0.0
    nz = M > 0
    pij = M[nz] / n
    outer = np.outer(M.sum(axis=1), M.sum(axis=0))[nz] / (n * n)
    mi = float(np.sum(pij * np.log(pij / outer)))
    return float(np.clip(mi / np.sqrt(h_p * h_t), 0.0, 1.0))
