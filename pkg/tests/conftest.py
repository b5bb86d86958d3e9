import numpy as np
import pytest

from morphogrow.fields import GrowthField, two_segment_grid


@pytest.fixture
def fig1_grid():
    return two_segment_grid(1.0, 0.8, 1)


@pytest.fixture
def fig1_growth(fig1_grid):
    return GrowthField(fig1_grid, np.array([0.9, 5.5]))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
