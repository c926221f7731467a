import sys

import pytest

from ohmicbath import OhmicCoupling, OscillatorParams


@pytest.fixture
def fig1():
    """omega0 = 3, gamma = 1: the underdamped reference case."""
    return OscillatorParams(3.0, 1.0)


@pytest.fixture
def ohmic(fig1):
    return OhmicCoupling(fig1)


REGIMES = {
    "under": OscillatorParams(3.0, 1.0),
    "critical": OscillatorParams(1.0, 2.0),
    "over": OscillatorParams(1.0, 5.0),
}


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.summary_line(n, mod.RESULTS[n]))
