import numpy as np
import pytest

from lagbonnet.chart import ConformalChart


@pytest.fixture
def unit64():
    return ConformalChart(64, 64)


@pytest.fixture
def square():
    # symmetric chart with a grid point at the origin
    return ConformalChart(65, 65, -1.0, 1.0, -1.0, 1.0)


@pytest.fixture
def torus():
    return ConformalChart(64, 64, 0.0, 1.0, 0.0, 1.0, periodic_x=True, periodic_y=True)


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


def pytest_terminal_summary(terminalreporter):
    from _verdicts import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
