import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from poissonkit.algebra import Algebra
from poissonkit.experiments import random_element, random_hermitian, random_weight

settings.register_profile(
    "default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)
block_dims = st.sampled_from([(1,), (2,), (3,), (1, 1), (2, 1)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def m2_weight(rng):
    return random_weight(rng, (2,), 0.9)


def draw_instance(seed, dims, mass=None, n_letters=2, norm=1.0):
    rng = np.random.default_rng(seed)
    w = random_weight(rng, dims, mass if mass is not None else rng.uniform(0.1, 1.5))
    letters = [random_element(rng, w.algebra, norm) for _ in range(n_letters)]
    return rng, w, letters


__all__ = ["Algebra", "draw_instance", "random_element", "random_hermitian", "random_weight", "seeds", "block_dims"]
