"""
Shared fixtures: a small Bernoulli-Gaussian problem
"""

import pytest

from models.prior import PriorSpec
from services.experiments import gen_instance


@pytest.fixture
def bg_prior():
    return PriorSpec.bernoulli_gaussian(0.1, 1.0)


@pytest.fixture
def small_instance(bg_prior):
    return gen_instance(100, 200, bg_prior, sigma_w=0.1, seed=3)
