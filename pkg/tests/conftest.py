import pytest

from ckbrownian.core import GaussianPacket, PhysicalParams, SpatialGrid, TimeGrid

ACCEPTANCE_LINES = []


@pytest.fixture
def unit_params():
    """m = eta = D = 1, so gamma = 1."""
    return PhysicalParams(1.0, 1.0, 1.0)


@pytest.fixture
def packet():
    return GaussianPacket(1.0)


@pytest.fixture
def xgrid():
    return SpatialGrid(-32.0, 32.0, 1024)


@pytest.fixture
def tgrid():
    return TimeGrid(5.0, 1000)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
