import numpy as np
import pytest

from mvksc.data import MultiViewDataset, synth_linear_subspaces, synth_rings

ACCEPTANCE_FILE = "test_acceptance.py"
_acceptance = []


@pytest.fixture(scope="session")
def subspace_fixture():
    """The 3-cluster, 2-view linear subspace fixture (n=90)."""
    return synth_linear_subspaces(30, 3, [10, 12], 0.01, seed=7)


@pytest.fixture(scope="session")
def rings_fixture():
    """Two concentric rings, 50 points each, two views."""
    return synth_rings(50, 2, [1.0, 3.0], 0.05, seed=7)


def noisy_view_fixture(seed):
    """Subspace fixture whose last view is replaced by pure Gaussian noise."""
    ds = synth_linear_subspaces(30, 3, [10, 12], 0.01, seed=seed)
    views = list(ds.views)
    views[-1] = np.random.default_rng(1000 + seed).standard_normal(views[-1].shape)
    return MultiViewDataset(views, ds.labels, name="noisy")


def pytest_runtest_logreport(report):
    if report.when == "call" and ACCEPTANCE_FILE in report.nodeid:
        props = " ".join(f"{k}={v}" for k, v in report.user_properties)
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome, props))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, props in _acceptance:
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  {name}  {props}".rstrip())
