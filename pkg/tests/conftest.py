import numpy as np
import pytest

from diskqm.forms import Quadrature

#: acceptance lines collected by test_acceptance, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def small_quad():
    return Quadrature(24, 48, 32)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def disk_points(rng, n, rmax=0.98):
    r = rmax * np.sqrt(rng.uniform(size=n))
    th = rng.uniform(0, 2 * np.pi, n)
    return np.stack([r * np.cos(th), r * np.sin(th)], -1)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
