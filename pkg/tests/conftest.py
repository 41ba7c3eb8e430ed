import numpy as np
import pytest

from degroot_friedkin.catalog import shipped_catalog
from degroot_friedkin.matrixcore import InteractionMatrix

THREE_CYCLE = [[0, 1, 0], [0, 0, 1], [1, 0, 0]]
STAR = [[0, 0.5, 0.5], [1, 0, 0], [1, 0, 0]]
UNREACHABLE = [[0, 1, 0], [1, 0, 0], [1, 0, 0]]
ASYM3 = [[0, 0.5, 0.5], [0.5, 0, 0.5], [1, 0, 0]]

# name -> "PASS"/"FAIL" lines collected by tests/test_acceptance.py
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def catalog():
    return shipped_catalog()


@pytest.fixture
def three_cycle():
    return InteractionMatrix(THREE_CYCLE, id="cycle3")


@pytest.fixture
def asym3():
    return InteractionMatrix(ASYM3, id="asym3")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
