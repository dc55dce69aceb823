import numpy as np
import pytest

from stabtune.data import Dataset, center_and_scale

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_dataset(n, p, seed=0, rho=0.3, beta=None, sigma=1.0):
    rng = np.random.default_rng(seed)
    S = rho ** np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
    X = rng.standard_normal((n, p)) @ np.linalg.cholesky(S).T
    if beta is None:
        beta = np.zeros(p)
        beta[: min(3, p)] = (2.0, -1.5, 1.0)[: min(3, p)]
    y = X @ beta + sigma * rng.standard_normal(n)
    return Dataset(y, X)


@pytest.fixture
def small_prepared():
    return center_and_scale(make_dataset(50, 6, seed=1))
