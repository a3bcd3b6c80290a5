import numpy as np
import pytest

from bmckde.models import BetaBarModel, simulate_bar


@pytest.fixture(scope="session")
def bar_model():
    return BetaBarModel()


@pytest.fixture(scope="session")
def bar_tree_8():
    return simulate_bar(n=8, seed=3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
