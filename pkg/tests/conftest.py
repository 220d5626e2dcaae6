import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from forcedosc import Forcing, IntegratorConfig, build_gentrig, morris_forcing

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

DATA = os.path.join(os.path.dirname(__file__), "data")


def full_forcing(n, T=1.0, amp=0.1):
    """Every admissible coefficient present, each with a constant and one harmonic."""
    terms = {j: {"const": amp * (j + 1) / (2 * n), "cos": [amp], "sin": [0.0, 0.5 * amp]} for j in range(2 * n - 1)}
    return Forcing.from_terms(n, T, terms)


# p_0 = cos 2 pi t, p_1 = 0.3 sin 2 pi t, p_2 = 0.2 cos 4 pi t
ACCEPTANCE_TERMS = {0: {"cos": [1.0]}, 1: {"sin": [0.3]}, 2: {"cos": [0.0, 0.2]}}


@pytest.fixture(scope="session")
def g1():
    return build_gentrig(1)


@pytest.fixture(scope="session")
def g2():
    return build_gentrig(2)


@pytest.fixture(scope="session")
def g3():
    return build_gentrig(3)


@pytest.fixture(scope="session")
def morris():
    return morris_forcing()


@pytest.fixture(scope="session")
def acceptance_forcing():
    return Forcing.from_terms(2, 1.0, ACCEPTANCE_TERMS)


@pytest.fixture
def tight():
    return IntegratorConfig(rtol=1e-12, atol=1e-13)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
