import numpy as np
import pytest

from symcap import VPolytope

ACCEPTANCE_LINES = []


def random_pd(rng, d):
    X = rng.standard_normal((d, d))
    return X @ X.T + 0.1 * np.eye(d)


def random_unimodular(rng, d):
    T = rng.standard_normal((d, d))
    return T / abs(np.linalg.det(T)) ** (1.0 / d)


def random_polytope(rng, d, m=None):
    m = m or d + 4
    return VPolytope(rng.standard_normal((m, d))).reduced()


def triangle():
    return VPolytope([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
