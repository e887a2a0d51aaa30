import numpy as np
import pytest

from mmwave_sketch.array_geom import UlaConfig

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20161)


@pytest.fixture
def ula16():
    return UlaConfig(16, np.deg2rad(60.0))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
