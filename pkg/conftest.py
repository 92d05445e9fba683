import numpy as np
import pytest


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-size checks (deselect with -m 'not slow')")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def random_matrix(rng):
    def make(m, n, scale=1.0):
        return scale * rng.standard_normal((m, n))
    return make
