import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from thirring_qca.core import WalkParams

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture
def params():
    return WalkParams(0.37, 1.1)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log():
    """Record one summary line per acceptance criterion."""
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
