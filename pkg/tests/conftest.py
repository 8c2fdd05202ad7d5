import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from bargmann import kernels
from bargmann.fock import MixedState, random_pure_state

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    return kernels.load_backend(request.param)


def random_instance(rng, num_systems, num_internal, max_total=4, mixed=False):
    """Random single-system states with at most ``max_total`` photons overall."""
    per_state = max(1, max_total // num_systems)
    states = []
    for _ in range(num_systems):
        n = int(rng.integers(1, per_state + 1))
        if mixed and rng.random() < 0.5:
            w = float(rng.uniform(0.1, 0.9))
            a = random_pure_state(num_internal, n, rng)
            b = random_pure_state(num_internal, n, rng)
            states.append(MixedState.mixture([w, 1 - w], [a, b]))
        else:
            states.append(random_pure_state(num_internal, n, rng))
    return states


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
