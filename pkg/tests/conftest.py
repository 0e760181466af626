import math

import pytest

from lanemden.exponents import derive_exponents
from lanemden.grid import RadialGrid
from lanemden.measures import power, shell

ACCEPTANCE_LINES: list[str] = []


def catalog():
    """Desk-scale measures with closed-form structure."""
    return {
        "shell": shell(1.0, 1.0),
        "ball": power(1.0, 0.0, 0.0, 1.0),
        "global_power": power(1.0, 1.5),
    }


@pytest.fixture
def e_half():
    return derive_exponents(3, 0.5, 0.5, 0.5)


@pytest.fixture
def e_mixed():
    return derive_exponents(3, 0.5, 0.5, 1.0 / 3.0)


@pytest.fixture
def grid():
    return RadialGrid.logspace(1e-2, 1e2, 33)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def rel(a, b):
    a, b = float(a), float(b)
    if a == b:
        return 0.0
    return abs(a - b) / max(abs(a), abs(b), math.ulp(1.0))
