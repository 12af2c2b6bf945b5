import math

import pytest
from hypothesis import HealthCheck, settings

from rgbsde import corpus
from rgbsde.core import problem_grid

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


def norm_cdf(x):
    """Standard normal CDF from math.erf (independent of scipy)."""
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def bs_put_atm_zero_rate(sigma, T):
    return 2.0 * norm_cdf(sigma * math.sqrt(T) / 2.0) - 1.0


@pytest.fixture(scope="session")
def put_spec():
    return corpus.american_put()


@pytest.fixture(scope="session")
def put_grid(put_spec):
    # dx = 0.02 on [0, 2.5]; smallest stable nt that also allows m = 256
    return problem_grid(put_spec, 0.0, 2.5, 126, m_max=256)


@pytest.fixture(scope="session")
def dput_spec():
    return corpus.american_put(rate=0.05)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
