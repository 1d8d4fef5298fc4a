import sys

import numpy as np
import pytest

from canalflow.state import GRAVITY, State


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def g():
    return GRAVITY


def random_state(rng, f_lo, f_hi, h_lo=0.05, h_hi=5.0, g=GRAVITY):
    """State with depth uniform in ``[h_lo, h_hi]`` and Froude number uniform in ``[f_lo, f_hi]``."""
    h = rng.uniform(h_lo, h_hi)
    return State(float(h), float(h * np.sqrt(g * h) * rng.uniform(f_lo, f_hi)))


@pytest.fixture
def test1_states():
    return State(0.25, 0.025), State(2.5, 0.25)


@pytest.fixture
def test2_states():
    return State(0.2, 3.0), State(1.8, 4.0)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
