import numpy as np
import pytest

from stationary_ge import ProcessParams, simulate


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def equal_path():
    """n=100 path at alpha0 = alpha1 = 2, lambda = 1."""
    return simulate(100, ProcessParams(2.0, 2.0, 1.0), seed=7).values


@pytest.fixture(scope="session")
def unequal_path():
    return simulate(100, ProcessParams(2.0, 3.0, 1.0), seed=11).values


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
