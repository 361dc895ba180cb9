import numpy as np
import pytest

from ergolab.systems import make_system

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def doubling():
    return make_system("doubling")


@pytest.fixture
def tent():
    return make_system("tent")


@pytest.fixture
def ulam():
    return make_system("logistic", t=1.0)


@pytest.fixture
def halving():
    return make_system("contraction", factor=0.5)


@pytest.fixture
def mp():
    return make_system("manneville_pomeau", gamma=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
