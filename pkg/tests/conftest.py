import math

import numpy as np
import pytest

from quanta_timing.distributions import DeadlineInputDensity, exponential, weibull

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def expo():
    return exponential(1.0)


@pytest.fixture
def wb2():
    return weibull(1.0, 2.0)


@pytest.fixture
def deadline_e():
    return DeadlineInputDensity.from_lambda_tau(math.e)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
