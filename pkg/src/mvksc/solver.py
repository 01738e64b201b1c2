"""ADMM solver for enriched robust multi-view kernel subspace clustering.

The model, per view ``v`` with Gram matrix ``K_v``::

    min  sum_v ||Phi(X_v) - Phi(X_v) C_v||_F^2 + theta ||C_v||_1 + lam ||C_v - C*||_1
         + gamma tr(F^T L F)
    s.t. F^T F = I,  diag(C_v) = 0,  C_v^T 1 = 1

with ``L`` the Laplacian of ``W = (|C*| + |C*|^T) / 2``. Splitting
``A_v = C_v`` gives closed-form updates for F (eigenvectors), A (double-l1
prox), C (linear solve), C* (elementwise consensus) and the multipliers.
"""
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from mvksc import metrics, prox, spectral
from mvksc._backend import BACKEND
from mvksc.data import NORMALIZE_MODES, MultiViewDataset, normalize
from mvksc.kernels import KernelSpec, gram

log = logging.getLogger(__name__)

ROBUST_L1 = "l1"
FROBENIUS = "fro"


class ConfigError(ValueError):
    """Invalid solver configuration."""


class NumericalError(RuntimeError):
    """The solver produced or received non-finite values."""


@dataclass(frozen=True)
class SolverConfig:
    """Scalars and switches of the solver.

    ``consensus_mode="fro"`` with ``enriched=False`` is the squared-Frobenius
    consensus model; ``"l1"`` with ``enriched=False`` drops the spectral term;
    ``"l1"`` with ``enriched=True`` is the full model. ``rho_cap=None`` lets
    rho grow without bound.
    """

    k: int
    lam: float = 1.0
    gamma: float = 0.01
    theta: float = 0.01
    kernels: Tuple[KernelSpec, ...] = (KernelSpec(),)
    rho0: float = 0.2
    rho_mult: float = 1.2
    rho_cap: Optional[float] = 1e6
    max_iters: int = 100
    tol: float = 1e-4
    consensus_mode: str = ROBUST_L1
    enriched: bool = True
    seed: int = 0
    normalize: str = "unit"
    kmeans_restarts: int = 20
    check_solves: bool = False

    def __post_init__(self):
        if isinstance(self.kernels, KernelSpec):
            object.__setattr__(self, "kernels", (self.kernels,))
        else:
            object.__setattr__(self, "kernels", tuple(self.kernels))
        checks = [
            (isinstance(self.k, (int, np.integer)) and self.k >= 1, "k must be an integer >= 1"),
            (_finite(self.lam) and self.lam >= 0, "lambda must be >= 0"),
            (_finite(self.gamma) and self.gamma >= 0, "gamma must be >= 0"),
            (_finite(self.theta) and self.theta >= 0, "theta must be >= 0"),
            (_finite(self.rho0) and self.rho0 > 0, "rho0 must be > 0"),
            (_finite(self.rho_mult) and self.rho_mult >= 1, "rho_mult must be >= 1"),
            (self.rho_cap is None or (self.rho_cap > 0 and not math.isnan(self.rho_cap)),
             "rho_cap must be > 0 or unbounded"),
            (isinstance(self.max_iters, (int, np.integer)) and self.max_iters >= 1,
             "max_iters must be an integer >= 1"),
            (_finite(self.tol) and self.tol > 0, "tol must be > 0"),
            (self.consensus_mode in (ROBUST_L1, FROBENIUS), "consensus_mode must be 'l1' or 'fro'"),
            (self.normalize in NORMALIZE_MODES, f"normalize must be one of {NORMALIZE_MODES}"),
            (len(self.kernels) >= 1, "at least one kernel spec required"),
            (self.kmeans_restarts >= 1, "kmeans_restarts must be >= 1"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)

    @property
    def spectral_active(self):
        return self.enriched and self.gamma > 0

    def kernel_for(self, view):
        if len(self.kernels) == 1:
            return self.kernels[0]
        return self.kernels[view]

    def to_dict(self):
        d = asdict(self)
        d["kernels"] = [str(k) for k in self.kernels]
        return d


def _finite(x):
    return isinstance(x, (int, float, np.floating, np.integer)) and math.isfinite(x)


class TraceRow(NamedTuple):
    iter: int
    objective: float
    residual_CA: float
    residual_sum1: float
    rho: float


@dataclass
class SolverState:
    C: List[np.ndarray]
    A: List[np.ndarray]
    Sigma: List[np.ndarray]
    delta: List[np.ndarray]
    C_star: np.ndarray
    F: np.ndarray
    rho: float
    iter: int = 0
    trace: List[TraceRow] = field(default_factory=list)

    @classmethod
    def zeros(cls, n, n_views, k, rho):
        z = lambda: np.zeros((n, n))  # noqa: E731
        return cls(
            C=[z() for _ in range(n_views)],
            A=[z() for _ in range(n_views)],
            Sigma=[z() for _ in range(n_views)],
            delta=[np.zeros(n) for _ in range(n_views)],
            C_star=z(),
            F=np.eye(n, k),
            rho=rho,
        )


@dataclass
class ClusteringResult:
    labels: np.ndarray
    F: np.ndarray
    C_star: np.ndarray
    C: List[np.ndarray]
    A: List[np.ndarray]
    trace: List[TraceRow]
    iterations: int
    converged: bool
    metrics: Optional[dict]
    config: SolverConfig
    backend: str = BACKEND


# --- individual updates ---------------------------------------------------

def update_C(K, A, Sigma, delta, rho):
    """Solve ``(K + rho I + rho 11^T) C = K + rho 11^T - 1 delta^T + rho A - Sigma``."""
    K = np.asarray(K, dtype=np.float64)
    n = K.shape[0]
    M = K + rho * (np.eye(n) + 1.0)
    R = _rhs(K, A, Sigma, delta, rho)
    try:
        factor = scipy.linalg.cho_factor(M, check_finite=True)
        return scipy.linalg.cho_solve(factor, R, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"C update failed: {exc}") from None


def _rhs(K, A, Sigma, delta, rho):
    n = K.shape[0]
    return K + rho - np.outer(np.ones(n), delta) + rho * A - Sigma


def update_C_linear_fast(X, A, Sigma, delta, rho):
    """Linear-kernel C update through the Woodbury identity.

    With ``Z = [X; sqrt(rho) 1^T]`` the system matrix is ``Z^T Z + rho I`` and

        (Z^T Z + rho I)^-1 = (I - Z^T (rho I + Z Z^T)^-1 Z) / rho,

    so only a ``(d+1) x (d+1)`` system is factored: O(d^3 + d n^2).
    """
    X = np.asarray(X, dtype=np.float64)
    d, n = X.shape
    Z = np.vstack([X, np.full((1, n), math.sqrt(rho))])
    R = Z.T @ Z - np.outer(np.ones(n), delta) + rho * A - Sigma
    inner = rho * np.eye(d + 1) + Z @ Z.T
    try:
        factor = scipy.linalg.cho_factor(inner)
        return (R - Z.T @ scipy.linalg.cho_solve(factor, Z @ R)) / rho
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"C update failed: {exc}") from None


def update_multipliers(state, rho):
    """Dual ascent: ``delta += rho (C^T 1 - 1)``, ``Sigma += rho (C - A)``."""
    for v in range(len(state.C)):
        state.delta[v] = state.delta[v] + rho * (state.C[v].sum(axis=0) - 1.0)
        state.Sigma[v] = state.Sigma[v] + rho * (state.C[v] - state.A[v])
    return state


def objective(state, grams, config):
    """Model objective evaluated on the C variables (not A)."""
    total = 0.0
    for K, C in zip(grams, state.C):
        fit = np.trace(K) - 2.0 * np.sum(K * C) + np.sum(C * (K @ C))
        total += fit + config.theta * np.abs(C).sum()
        if config.consensus_mode == FROBENIUS:
            total += config.lam * np.sum((C - state.C_star) ** 2)
        else:
            total += config.lam * np.abs(C - state.C_star).sum()
    if config.spectral_active:
        L = spectral.affinity_from(state.C_star).L
        total += config.gamma * np.trace(state.F.T @ L @ state.F)
    return float(total)


def residuals(state):
    """(max_v ||C_v - A_v||_max, max_v ||C_v^T 1 - 1||_inf)."""
    r_ca = max(float(np.abs(C - A).max()) for C, A in zip(state.C, state.A))
    r_s1 = max(float(np.abs(C.sum(axis=0) - 1.0).max()) for C in state.C)
    return r_ca, r_s1


# --- driver ---------------------------------------------------------------

def _prepare(dataset, config):
    if config.k > dataset.n_samples:
        raise ConfigError(f"k={config.k} exceeds the sample count {dataset.n_samples}")
    if len(config.kernels) not in (1, dataset.n_views):
        raise ConfigError(
            f"{len(config.kernels)} kernel specs for {dataset.n_views} views"
        )
    data = normalize(dataset, config.normalize)
    grams = [gram(X, config.kernel_for(v)) for v, X in enumerate(data.views)]
    fast = [config.kernel_for(v).is_linear and X.shape[1] > X.shape[0]
            for v, X in enumerate(data.views)]
    return data, grams, fast


def run_admm(dataset: MultiViewDataset, config: SolverConfig, callback=None):
    """Run the ADMM iterations; returns ``(state, grams, converged)``.

    ``callback(state)`` is invoked after every iteration.
    """
    data, grams, fast = _prepare(dataset, config)
    n, nv, k = dataset.n_samples, dataset.n_views, config.k
    state = SolverState.zeros(n, nv, k, config.rho0)
    update_A = prox.update_A if config.consensus_mode == ROBUST_L1 else prox.update_A_frobenius
    update_Cs = (prox.update_C_star if config.consensus_mode == ROBUST_L1
                 else prox.update_C_star_frobenius)
    converged = False

    for t in range(1, config.max_iters + 1):
        rho = state.rho
        if config.spectral_active:
            state.F = spectral.update_F(spectral.affinity_from(state.C_star).L, k).F
        for v in range(nv):
            state.A[v] = update_A(state.C[v], state.Sigma[v], state.C_star, rho,
                                  config.theta, config.lam)
            if fast[v]:
                state.C[v] = update_C_linear_fast(data.views[v], state.A[v], state.Sigma[v],
                                                  state.delta[v], rho)
            else:
                state.C[v] = update_C(grams[v], state.A[v], state.Sigma[v], state.delta[v], rho)
            if config.check_solves and t % 10 == 0:
                _check_solve(grams[v], state, v, rho)
        Q = spectral.pairwise_sq_dists(state.F) if config.spectral_active else np.zeros((n, n))
        state.C_star = update_Cs(state.A, Q, config.lam, config.gamma if config.enriched else 0.0)

        r_ca, r_s1 = residuals(state)
        obj = objective(state, grams, config)
        if not (math.isfinite(obj) and math.isfinite(r_ca) and math.isfinite(r_s1)):
            raise NumericalError(f"non-finite iterate at iteration {t}")
        update_multipliers(state, rho)
        state.iter = t
        state.trace.append(TraceRow(t, obj, r_ca, r_s1, rho))
        log.debug("iter %d obj %.6g r_CA %.3g r_sum1 %.3g rho %.3g", t, obj, r_ca, r_s1, rho)

        next_rho = rho * config.rho_mult
        if config.rho_cap is not None:
            next_rho = min(next_rho, config.rho_cap)
        state.rho = max(next_rho, rho)
        if callback is not None:
            callback(state)
        if r_ca < config.tol and r_s1 < config.tol:
            converged = True
            break
    return state, grams, converged


def _check_solve(K, state, v, rho):
    n = K.shape[0]
    M = K + rho * (np.eye(n) + 1.0)
    R = _rhs(K, state.A[v], state.Sigma[v], state.delta[v], rho)
    err = np.abs(M @ state.C[v] - R).max()
    if err > 1e-8 * max(1.0, np.abs(R).max()):
        raise NumericalError(f"C solve residual {err:.3g} in view {v}")


def fit(dataset: MultiViewDataset, config: SolverConfig, callback=None) -> ClusteringResult:
    """Solve the model, embed the final consensus and cluster with k-means.

    The embedding used for labeling is recomputed from the final ``C*``, then
    row-normalized before k-means.
    """
    state, grams, converged = run_admm(dataset, config, callback)
    F = spectral.update_F(spectral.affinity_from(state.C_star).L, config.k).F
    labels = spectral.kmeans_labels(spectral.row_normalize(F), config.k, seed=config.seed,
                                    n_init=config.kmeans_restarts)
    scores = None
    if dataset.labels is not None:
        scores = {
            "acc": float(metrics.accuracy(labels, dataset.labels)),
            "nmi": float(metrics.nmi(labels, dataset.labels)),
            "nmi_normalization": metrics.NMI_NORMALIZATION,
        }
    return ClusteringResult(
        labels=labels, F=F, C_star=state.C_star, C=state.C, A=state.A, trace=state.trace,
        iterations=state.iter, converged=converged, metrics=scores, config=config,
    )


def make_config(k, kernels: Sequence[KernelSpec] = (KernelSpec(),), **overrides):
    """Convenience constructor accepting ``lambda=`` as an alias of ``lam``."""
    if "lambda" in overrides:
        overrides["lam"] = overrides.pop("lambda")
    return SolverConfig(k=k, kernels=tuple(kernels), **overrides)
