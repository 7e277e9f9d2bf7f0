import numpy as np
import pytest
from hypothesis import settings

from skly.specfun import EllipticParams

settings.register_profile("skly", max_examples=25, deadline=None, derandomize=True)
settings.load_profile("skly")


@pytest.fixture
def params():
    return EllipticParams(0.9j, 0.21j, 0.03)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_points(rng, n, scale=0.3):
    return rng.uniform(-0.5, 0.5, n) + 1j * rng.uniform(-scale, scale, n)


def pytest_terminal_summary(terminalreporter):
    from tests import test_acceptance

    if not test_acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(test_acceptance.RESULTS):
        terminalreporter.write_line(test_acceptance.RESULTS[n])
