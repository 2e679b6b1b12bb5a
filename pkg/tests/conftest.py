import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from replab.figures import bundled_game

settings.register_profile("replab", deadline=None, max_examples=100,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("replab")


@pytest.fixture(scope="session")
def mp():
    return bundled_game("matching_pennies")


@pytest.fixture(scope="session")
def g32():
    return bundled_game("mp_3x2")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
