import numpy as np
import pytest

from invlap import bem

#: one line per acceptance criterion, filled by tests/test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def mesh2():
    return bem.benchmark_rectangle_mesh(2)


@pytest.fixture(scope="session")
def mesh4():
    return bem.benchmark_rectangle_mesh(4)


@pytest.fixture(scope="session")
def mesh8():
    return bem.benchmark_rectangle_mesh(8)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
