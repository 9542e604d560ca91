import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sdym import gauge, hidden

settings.register_profile("sdym", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("sdym")

BASE = (0.3, 0.2, -0.1, 0.4)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def bpst():
    return gauge.bpst_instanton()


@pytest.fixture(scope="session")
def bpst_jets(bpst):
    return bpst.to_jets(BASE, 6)


@pytest.fixture(scope="session")
def bpst_psi(bpst_jets):
    return hidden.lax_recursion(bpst_jets, 7)


@pytest.fixture(scope="session")
def bpst_small(bpst):
    """Cheaper background for the heavier hidden-symmetry tests."""
    A = bpst.to_jets(BASE, 3)
    return A, hidden.lax_recursion(A, 4)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for num in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[num])
