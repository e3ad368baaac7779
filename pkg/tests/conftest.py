import math

import numpy as np
import pytest

from ifsmap import kernels
from ifsmap.grid import make_grid


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_grid():
    return make_grid(2, 8.0, 64)


@pytest.fixture(scope="session")
def wave_grid():
    # the default 2D box: holds lambda up to 64 at the enforced resolution
    return make_grid(2, math.pi, 512)


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    previous = kernels.BACKEND
    kernels.use_backend(request.param)
    yield request.param
    kernels.use_backend(previous)


def random_field(grid, rng, scale=1.0):
    vals = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    return grid.field(scale * vals)
