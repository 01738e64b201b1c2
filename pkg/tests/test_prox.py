import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvksc import _pykernels, prox
from mvksc._backend import BACKEND
from mvksc.prox import ConsensusParams, DoubleL1Params

from oracles import consensus_enum_min, consensus_grid_min, prox_grid_min

finite = st.floats(-10, 10, allow_nan=False)
nonneg = st.floats(0, 3, allow_nan=False)


def P(y, a, b, c):
    return DoubleL1Params(y, a, b, c)


# --- soft threshold --------------------------------------------------------

@pytest.mark.parametrize("y,t,expected", [(2.0, 0.5, 1.5), (-0.3, 0.5, 0.0), (0.0, 1.0, 0.0)])
def test_soft_threshold(y, t, expected):
    assert prox.soft_threshold(y, t) == expected


@given(finite, finite, st.floats(0, 5))
def test_soft_threshold_monotone_and_shrinking(y1, y2, t):
    lo, hi = sorted((y1, y2))
    assert prox.soft_threshold(lo, t) <= prox.soft_threshold(hi, t)
    assert abs(prox.soft_threshold(y1, t)) <= abs(y1)


# --- double l1 -------------------------------------------------------------

@pytest.mark.parametrize("params,expected", [
    (P(3, 0.5, 0.5, 1), 2.0),
    (P(-2, 0.5, 0.5, 1), -1.0),
    (P(0.6, 0.5, 0.5, 0), 0.0),
    (P(1.5, 0.5, 0.5, 1), 1.0),  # kink at c*
])
def test_prox_double_l1_examples(params, expected):
    assert prox.prox_double_l1(params) == pytest.approx(expected, abs=1e-12)


@settings(max_examples=500)
@given(finite, nonneg, nonneg)
def test_zero_anchor_is_soft_threshold_exactly(y, a, b):
    assert prox.prox_double_l1(P(y, a, b, 0.0)) == prox.soft_threshold(y, a + b)


@settings(max_examples=500)
@given(finite, nonneg, nonneg, st.floats(-5, 5))
def test_odd_symmetry(y, a, b, c):
    assert prox.prox_double_l1(P(-y, a, b, -c)) == -prox.prox_double_l1(P(y, a, b, c))


@settings(max_examples=300)
@given(finite, nonneg, nonneg, st.floats(-5, 5))
def test_beats_grid_oracle(y, a, b, c):
    j = prox.prox_double_l1(P(y, a, b, c))
    assert prox.double_l1_objective(j, y, a, b, c) <= prox_grid_min(y, a, b, c) + 1e-9


@settings(max_examples=500)
@given(finite, nonneg, nonneg, st.floats(-5, 5).filter(lambda c: c != 0))
def test_casework_agrees(y, a, b, c):
    value, case = prox.prox_double_l1_cases(P(y, a, b, c))
    j = prox.prox_double_l1(P(y, a, b, c))
    fj = prox.double_l1_objective(j, y, a, b, c)
    fv = prox.double_l1_objective(value, y, a, b, c)
    assert fv == pytest.approx(fj, abs=1e-12)


def test_casework_kink_region_is_not_zero():
    assert prox.prox_double_l1_cases(P(1.5, 0.5, 0.5, 1)) == (1, "kink")


def test_params_validation():
    with pytest.raises(ValueError):
        P(1, -0.1, 0, 0)
    with pytest.raises(ValueError):
        P(float("inf"), 0, 0, 0)


# --- consensus -------------------------------------------------------------

@pytest.mark.parametrize("params,expected", [
    (ConsensusParams([1, 3], 1, 1, 1), 1.0),
    (ConsensusParams([5], 100, 0.01, 1), 0.0),
    (ConsensusParams([-2, -2, -2], 0, 1, 1), -2.0),
])
def test_consensus_examples(params, expected):
    assert prox.consensus_scalar(params) == expected
    assert prox.consensus_closed_form(params) == expected


def test_consensus_needs_views():
    with pytest.raises(ValueError):
        ConsensusParams([], 1, 1, 1)


a_lists = st.lists(st.floats(-5, 5), min_size=1, max_size=6)


@settings(max_examples=300)
@given(a_lists, st.floats(0, 10), st.floats(0.01, 3), st.floats(0, 3))
def test_consensus_matches_enumeration_and_grid(a, q, lam, gamma):
    p = ConsensusParams(a, q, lam, gamma)
    c = prox.consensus_scalar(p)
    a = np.asarray(a)
    enum = consensus_enum_min(a, gamma * q, lam)
    assert prox.consensus_objective(c, a, q, lam, gamma) == pytest.approx(enum, abs=1e-12)
    grid = consensus_grid_min(a, gamma * q, lam, 1e-3)
    lip = gamma * q + 2 * lam * a.size
    assert enum <= grid + 1e-12
    assert grid - enum <= lip * 1e-3 / 2 + 1e-12


@settings(max_examples=500)
@given(a_lists, st.floats(0, 10), st.floats(0.01, 3), st.floats(0, 3))
def test_closed_form_agrees_in_objective(a, q, lam, gamma):
    p = ConsensusParams(a, q, lam, gamma)
    f_enum = prox.consensus_objective(prox.consensus_scalar(p), a, q, lam, gamma)
    f_closed = prox.consensus_objective(prox.consensus_closed_form(p), a, q, lam, gamma)
    assert f_closed == pytest.approx(f_enum, rel=1e-12, abs=1e-12)


# --- matrix wrappers -------------------------------------------------------

def test_update_A_zero_fixed_point():
    Z = np.zeros((4, 4))
    np.testing.assert_array_equal(prox.update_A(Z, Z, Z, 1.0, 0.5, 0.5), Z)


def test_update_A_two_by_two():
    C = np.array([[0.0, 3.0], [3.0, 0.0]])
    Cs = np.array([[0.0, 1.0], [1.0, 0.0]])
    A = prox.update_A(C, np.zeros((2, 2)), Cs, rho=1.0, theta=0.5, lam=0.5)
    np.testing.assert_allclose(A, [[0.0, 2.0], [2.0, 0.0]], atol=1e-12)


def test_update_A_diagonal_zero_and_entrywise():
    rng = np.random.default_rng(3)
    C, S, Cs = (rng.standard_normal((6, 6)) for _ in range(3))
    rho, theta, lam = 0.7, 0.2, 0.9
    A = prox.update_A(C, S, Cs, rho, theta, lam)
    assert np.all(np.diag(A) == 0.0)
    Y = C + S / rho
    for i in range(6):
        for j in range(6):
            if i != j:
                assert A[i, j] == prox.prox_double_l1(P(Y[i, j], lam / rho, theta / rho, Cs[i, j]))


def test_update_A_rejects_bad_rho():
    Z = np.zeros((2, 2))
    with pytest.raises(ValueError):
        prox.update_A(Z, Z, Z, 0.0, 0.1, 0.1)


def test_update_C_star_examples():
    Z = np.zeros((3, 3))
    np.testing.assert_array_equal(prox.update_C_star([Z, Z], Z, 1.0, 1.0), Z)
    rng = np.random.default_rng(0)
    A = rng.standard_normal((5, 5))
    np.fill_diagonal(A, 0)
    np.testing.assert_array_equal(prox.update_C_star([A], rng.random((5, 5)), 1.0, 0.0), A)
    A1 = np.array([[0.0, 1.0], [1.0, 0.0]])
    A2 = np.array([[0.0, 3.0], [3.0, 0.0]])
    Q = np.array([[0.0, 1.0], [1.0, 0.0]])
    np.testing.assert_array_equal(prox.update_C_star([A1, A2], Q, 1.0, 1.0), A1)


def test_update_C_star_errors():
    with pytest.raises(ValueError):
        prox.update_C_star([], np.zeros((2, 2)), 1.0, 1.0)
    with pytest.raises(ValueError):
        prox.update_C_star([np.zeros((2, 2))], np.zeros((3, 3)), 1.0, 1.0)


def test_update_C_star_entrywise_and_diagonal():
    rng = np.random.default_rng(5)
    views = [rng.standard_normal((7, 7)) for _ in range(3)]
    F = rng.standard_normal((7, 2))
    Q = ((F[:, None, :] - F[None, :, :]) ** 2).sum(-1)
    Cs = prox.update_C_star(views, Q, 0.8, 0.3)
    assert np.all(np.diag(Cs) == 0)
    for i in range(7):
        for j in range(7):
            if i != j:
                a = [V[i, j] for V in views]
                assert Cs[i, j] == prox.consensus_scalar(ConsensusParams(a, 0.3 * Q[i, j], 0.8, 1.0))


# --- Frobenius variants, checked against dense grids ----------------------

def _offdiag(x):
    return np.array([[0.0, x], [x, 0.0]])


def test_frobenius_A_update_against_grid():
    rng = np.random.default_rng(11)
    g = np.linspace(-8, 8, 160001)
    for _ in range(200):
        y, c = rng.uniform(-4, 4, 2)
        lam, theta = rng.uniform(0, 2, 2)
        j = prox.update_A_frobenius(_offdiag(y), np.zeros((2, 2)), _offdiag(c), 1.0, theta, lam)[0, 1]
        f = lambda x: theta * np.abs(x) + lam * (x - c) ** 2 + 0.5 * (x - y) ** 2  # noqa: E731
        assert f(j) <= f(g).min() + 1e-9


def test_frobenius_consensus_against_grid():
    rng = np.random.default_rng(12)
    g = np.linspace(-8, 8, 160001)
    for _ in range(200):
        a = rng.uniform(-4, 4, rng.integers(1, 5))
        q, lam, gamma = rng.uniform(0, 5), rng.uniform(0.05, 2), rng.uniform(0, 2)
        c = prox.update_C_star_frobenius([_offdiag(x) for x in a], _offdiag(q), lam, gamma)[0, 1]
        f = lambda x: gamma * q * np.abs(x) + sum(2 * lam * (x - ai) ** 2 for ai in a)  # noqa: E731
        assert f(c) <= f(g).min() + 1e-9


def test_frobenius_wrapper_shape_and_diagonal():
    rng = np.random.default_rng(2)
    views = [rng.standard_normal((4, 4)) for _ in range(2)]
    Cs = prox.update_C_star_frobenius(views, np.ones((4, 4)), 1.0, 0.1)
    assert np.all(np.diag(Cs) == 0)
    off = ~np.eye(4, dtype=bool)
    expected = prox.soft_threshold((views[0] + views[1]) / 2, 0.1 / 8)
    np.testing.assert_allclose(Cs[off], expected[off])


# --- backend equivalence ---------------------------------------------------

@pytest.mark.skipif(BACKEND != "cython", reason="compiled extension not built")
def test_backends_bit_identical():
    from mvksc import _ckernels

    rng = np.random.default_rng(9)
    for _ in range(20):
        n = rng.integers(2, 30)
        Y = rng.standard_normal((n, n)) * 3
        Cs = rng.standard_normal((n, n)) * (rng.random((n, n)) > 0.3)
        a, b = rng.uniform(0, 2, 2)
        np.testing.assert_array_equal(_ckernels.prox_double_l1_matrix(Y, Cs, a, b),
                                      _pykernels.prox_double_l1_matrix(Y, Cs, a, b))
        v = rng.integers(1, 6)
        A = np.round(rng.standard_normal((v, n, n)), 1)  # rounding creates duplicate values
        GQ = rng.random((n, n)) * rng.choice([0.0, 1.0, 5.0])
        lam = rng.uniform(0, 2)
        np.testing.assert_array_equal(_ckernels.consensus_l1_matrix(A, GQ, lam),
                                      _pykernels.consensus_l1_matrix(A, GQ, lam))


def test_pure_python_switch():
    import os
    import subprocess
    import sys

    env = dict(os.environ, MVKSC_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from mvksc._backend import BACKEND; print(BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
