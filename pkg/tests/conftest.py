import numpy as np
import pytest

from prescurv.ambient import Warp, WarpedAmbient
from prescurv.hypersurface import PeriodicGrid


@pytest.fixture
def gauss2():
    return WarpedAmbient(2, Warp.gauss_decay(), slab=(0.5, 2.5))


@pytest.fixture
def grid16():
    return PeriodicGrid(2, (16, 16))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
