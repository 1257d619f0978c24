import numpy as np
import pytest

from facloc import exact1d
from facloc.measure import BoxDomain, DensityGrid, uniform_density


def two_block_density(x):
    """1/2 on [0,1], 0 on (1,2), 1/4 on [2,4]."""
    x = x[..., 0]
    return np.where(x < 1, 0.5, np.where(x > 2, 0.25, 0.0))


def two_block_grid(cells: int = 4000) -> DensityGrid:
    return DensityGrid.from_density(BoxDomain((0.0,), (4.0,)), (cells,), two_block_density)


@pytest.fixture(scope="session")
def two_block():
    return two_block_grid()


@pytest.fixture(scope="session")
def unit_1d():
    return uniform_density(BoxDomain.unit(1), (20000,))


@pytest.fixture(scope="session")
def seq_small():
    return exact1d.generate_sequence(2000)


@pytest.fixture(scope="session")
def seq_1e5():
    return exact1d.generate_sequence(10**5)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
