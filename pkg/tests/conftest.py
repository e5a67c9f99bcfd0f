import math

import numpy as np
import pytest

from weightedcs import new_dictionary

ACCEPTANCE_LINES = []


@pytest.fixture
def D0():
    """Two unit atoms and one atom of norm 2 in R^2."""
    r = math.sqrt(2)
    return new_dictionary([(1, 0), (0, 1), (r, r)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
