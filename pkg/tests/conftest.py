import numpy as np
import pytest

from riccidisk.geometry import make_metric
from riccidisk.grid import GridSpec, build_grid
from riccidisk.initial_data import CapParams, spherical_cap


@pytest.fixture(scope="session")
def grid_1d():
    return build_grid(GridSpec(128, 1))


@pytest.fixture(scope="session")
def grid_2d():
    return build_grid(GridSpec(64, 32))


@pytest.fixture(scope="session")
def hemisphere_1d(grid_1d):
    return spherical_cap(CapParams(1.0), grid_1d)


@pytest.fixture(scope="session")
def hemisphere_2d(grid_2d):
    return spherical_cap(CapParams(1.0), grid_2d)


@pytest.fixture(scope="session")
def flat_2d(grid_2d):
    return make_metric(np.zeros((grid_2d.n_r, grid_2d.n_theta)), grid_2d)
