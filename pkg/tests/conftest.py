import numpy as np
import pytest

from qdesign.core import haar_sample

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def haar():
    def draw(side, seed, group="unitary"):
        return haar_sample(side, group, seed)

    return draw


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
