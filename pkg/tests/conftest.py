import numpy as np
import pytest

from leakage.prob_core import bsc


@pytest.fixture
def bsc01():
    return bsc(0.1)


@pytest.fixture
def rng():
    return np.random.default_rng(42)
