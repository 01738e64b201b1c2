import numpy as np
import pytest

from mvksc import prox
from mvksc.data import MultiViewDataset, synth_linear_subspaces
from mvksc.kernels import KernelSpec, gram
from mvksc.solver import (ConfigError, SolverConfig, SolverState, fit, make_config, objective,
                          residuals, run_admm, update_C, update_C_linear_fast, update_multipliers)

from oracles import dense_update_C


def _random_inputs(rng, n):
    A = rng.standard_normal((n, n))
    S = rng.standard_normal((n, n))
    delta = rng.standard_normal(n)
    return A, S, delta


def test_update_C_zero_kernel():
    Z = np.zeros((3, 3))
    C = update_C(Z, Z, Z, np.zeros(3), 1.0)
    np.testing.assert_allclose(C, np.full((3, 3), 0.25), atol=1e-14)


def test_update_C_matches_dense_inverse():
    rng = np.random.default_rng(0)
    for _ in range(10):
        n = rng.integers(2, 20)
        X = rng.standard_normal((rng.integers(1, 8), n))
        K = gram(X)
        A, S, delta = _random_inputs(rng, n)
        rho = rng.uniform(0.1, 5)
        np.testing.assert_allclose(update_C(K, A, S, delta, rho),
                                   dense_update_C(K, A, S, delta, rho), atol=1e-8)


def test_update_C_stationary_at_feasible_point():
    # C = A with column sums one and zero multipliers solves the system when K C = K
    n = 4
    C0 = np.full((n, n), 1.0 / n)
    K = np.zeros((n, n))
    K[:] = 0.0
    rho = 0.5
    C = update_C(K, C0, np.zeros((n, n)), np.zeros(n), rho)
    # (rho I + rho 11^T) C = rho 11^T + rho C0 has C = C0 when C0 has unit column sums
    np.testing.assert_allclose(C, C0, atol=1e-14)


@pytest.mark.parametrize("d,n,rho,tol", [(3, 30, 0.7, 1e-9), (1, 5, 1.0, 1e-10)])
def test_fast_path_matches_direct(d, n, rho, tol):
    rng = np.random.default_rng(d)
    X = rng.standard_normal((d, n))
    A, S, delta = _random_inputs(rng, n)
    fast = update_C_linear_fast(X, A, S, delta, rho)
    direct = update_C(gram(X), A, S, delta, rho)
    assert np.abs(fast - direct).max() < tol


def test_multipliers():
    n = 3
    st = SolverState.zeros(n, 1, 1, 1.0)
    st.C[0] = np.eye(n) * 2.0
    st.A[0] = np.eye(n)
    update_multipliers(st, 0.5)
    np.testing.assert_allclose(st.delta[0], [0.5, 0.5, 0.5])
    np.testing.assert_allclose(st.Sigma[0], 0.5 * np.eye(n))


def test_objective_all_zero_state():
    n, v = 5, 2
    st = SolverState.zeros(n, v, 2, 1.0)
    cfg = SolverConfig(k=2, gamma=0.0)
    assert objective(st, [np.eye(n)] * v, cfg) == pytest.approx(v * n)


def test_objective_spectral_term_vanishes_on_block_indicator():
    n = 4
    st = SolverState.zeros(n, 1, 2, 1.0)
    st.C_star = np.kron(np.eye(2), np.ones((2, 2)))
    st.F = np.kron(np.eye(2), np.ones((2, 1))) / np.sqrt(2)
    K = np.zeros((n, n))
    with_term = objective(st, [K], SolverConfig(k=2, gamma=5.0))
    without = objective(st, [K], SolverConfig(k=2, gamma=0.0))
    assert with_term == pytest.approx(without, abs=1e-12)


def test_residuals():
    st = SolverState.zeros(2, 1, 1, 1.0)
    st.C[0] = np.array([[1.0, 0.5], [0.0, 0.5]])
    assert residuals(st) == (1.0, 0.0)


def test_config_validation():
    with pytest.raises(ConfigError):
        SolverConfig(k=0)
    with pytest.raises(ConfigError):
        SolverConfig(k=2, lam=-1)
    with pytest.raises(ConfigError):
        SolverConfig(k=2, rho0=0)
    with pytest.raises(ConfigError):
        SolverConfig(k=2, consensus_mode="l2")
    assert make_config(2, **{"lambda": 0.3}).lam == 0.3
    assert not SolverConfig(k=2, gamma=0.0).spectral_active
    assert not SolverConfig(k=2, enriched=False).spectral_active


def test_prepare_errors():
    ds = synth_linear_subspaces(5, 2, [6, 6], seed=0)
    with pytest.raises(ConfigError):
        fit(ds, SolverConfig(k=11))
    with pytest.raises(ConfigError):
        fit(ds, SolverConfig(k=2, kernels=(KernelSpec(),) * 3))


@pytest.fixture(scope="module")
def small():
    return synth_linear_subspaces(10, 2, [8, 9], 0.01, seed=3)


def test_iteration_invariants(small):
    seen = []

    def check(state):
        for A in state.A:
            assert np.all(np.diag(A) == 0)
        assert np.all(np.diag(state.C_star) == 0)
        F = state.F
        assert np.abs(F.T @ F - np.eye(F.shape[1])).max() < 1e-8
        seen.append(state.rho)

    cfg = SolverConfig(k=2, max_iters=30)
    run_admm(small, cfg, callback=check)
    assert seen[0] == pytest.approx(0.2 * 1.2)
    assert all(b >= a for a, b in zip(seen, seen[1:]))


def test_rho_cap():
    ds = synth_linear_subspaces(5, 2, [6, 6], seed=1)
    state, _, _ = run_admm(ds, SolverConfig(k=2, rho_cap=0.3, max_iters=10, tol=1e-300))
    assert state.rho == 0.3
    assert max(r.rho for r in state.trace) == 0.3


def test_determinism(small):
    cfg = SolverConfig(k=2, max_iters=40)
    a, b = fit(small, cfg), fit(small, cfg)
    np.testing.assert_array_equal(a.labels, b.labels)
    np.testing.assert_array_equal(a.C_star, b.C_star)


def test_single_view_consensus_tracks_A():
    ds = synth_linear_subspaces(8, 2, [7], 0.01, seed=2)
    cfg = SolverConfig(k=2, lam=100.0, gamma=0.0, max_iters=60)
    res = fit(ds, cfg)
    assert np.abs(res.C_star - res.A[0]).max() < 1e-3


def test_mode_degeneracy_with_single_view_and_no_spectral_term():
    # one view, gamma = 0: both consensus rules return A exactly off the diagonal
    rng = np.random.default_rng(0)
    A = rng.standard_normal((6, 6))
    np.fill_diagonal(A, 0)
    Q = np.zeros((6, 6))
    np.testing.assert_array_equal(prox.update_C_star([A], Q, 1.0, 0.0),
                                  prox.update_C_star_frobenius([A], Q, 1.0, 0.0))


def test_polynomial_kernel_runs(small):
    res = fit(small, SolverConfig(k=2, kernels=(KernelSpec("polynomial", 1.0, 2),), max_iters=20))
    assert res.labels.shape == (small.n_samples,)
    assert res.metrics["nmi_normalization"] == "geometric"


def test_unlabeled_dataset_has_no_metrics(small):
    ds = MultiViewDataset(small.views)
    assert fit(ds, SolverConfig(k=2, max_iters=5)).metrics is None


def test_check_solves_passes(small):
    fit(small, SolverConfig(k=2, max_iters=20, check_solves=True))
