import numpy as np
import pytest

from azrenyi.states import RandomSpec, random_density


def rand_pair(dim, seed, rank=None):
    rho = random_density(RandomSpec(dim, rank, seed))
    sigma = random_density(RandomSpec(dim, None, seed + 100_000))
    return rho, sigma


def diag_pair(dim, seed):
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(dim))
    q = rng.dirichlet(np.ones(dim))
    return p, q


@pytest.fixture
def pair3():
    return rand_pair(3, 7)


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_line():
    """Record one summary line; all lines are printed after the run."""
    return _ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
