import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20250825)


@pytest.fixture
def single_spin():
    from annealbound import IsingProblem

    return IsingProblem(n_spins=1, terms=(((0,), 1.0),))
