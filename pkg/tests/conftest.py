import numpy as np
import pytest

from wlike.state_family import StateFamilyParams, build_rho

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def params3():
    return StateFamilyParams.hadamard(3, 2)


@pytest.fixture(scope="session")
def rho3(params3):
    return build_rho(params3)


@pytest.fixture(scope="session")
def params4():
    return StateFamilyParams.hadamard(4, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_density(rng, n, rank=None):
    rank = rank or n
    g = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
