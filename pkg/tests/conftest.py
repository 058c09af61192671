import sys

import numpy as np
import pytest

from susydirac.core import Grid, PhysicalConstants, PotentialSpec
from susydirac.witten import witten_levels


@pytest.fixture(scope="session")
def natural():
    return PhysicalConstants()


@pytest.fixture(scope="session")
def oscillator():
    return PotentialSpec.oscillator(1.0)


@pytest.fixture(scope="session")
def wide_grid():
    return Grid(-12.0, 12.0, 4001)


@pytest.fixture(scope="session")
def oscillator_levels(natural, oscillator, wide_grid):
    return witten_levels(oscillator, natural, wide_grid, 8)


@pytest.fixture(scope="session")
def quartic_grid():
    return Grid(-6.0, 6.0, 4001)


def pytest_configure(config):
    np.seterr(over="raise", invalid="raise", divide="raise", under="ignore")


def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in list(sys.modules.items()) if name.endswith("test_acceptance")), None)
    rows = getattr(mod, "REPORT", {})
    if rows:
        terminalreporter.section("acceptance criteria")
        for n in sorted(rows):
            terminalreporter.write_line(rows[n])
