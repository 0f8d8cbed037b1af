import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line[1])


class FixedRng:
    """Deterministic stand-in for RngStream returning constant draws."""

    def __init__(self, random=0.5, uniform=0.0, normal=0.0):
        self._random, self._uniform, self._normal = random, uniform, normal

    def random(self, size=None):
        return self._random if size is None else np.full(size, self._random, dtype=float)

    def uniform(self, low, high, size=None):
        return self._uniform if size is None else np.full(size, self._uniform, dtype=float)

    def normal(self, size=None):
        return self._normal if size is None else np.full(size, self._normal, dtype=float)


@pytest.fixture
def fixed_rng():
    return FixedRng
