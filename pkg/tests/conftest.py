import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_values(rng, shape):
    return rng.standard_normal(shape)
