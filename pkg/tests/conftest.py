import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def ex1():
    """(12,6,6) EPCC for the length-1..5 dominant events."""
    from tepcc.systems import build_epcc

    return build_epcc(12, 5, 6)


@pytest.fixture(scope="session")
def ex2():
    from tepcc.systems import build_epcc

    return build_epcc(18, 10, 8)


def pytest_terminal_summary(terminalreporter):
    from _acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
