import numpy as np
import pytest

from wavestab.geometry import Domain, Grid, omega_mesh


@pytest.fixture(scope="session")
def small_domain():
    return Domain(omega_half_width=0.5, box_half_width=1.0, rho=0.25)


@pytest.fixture(scope="session")
def small_grid(small_domain):
    return Grid.build(small_domain, 0.05, 1.0, cfl=0.5, enforce_window=False)


@pytest.fixture(scope="session")
def small_mesh(small_domain, small_grid):
    return omega_mesh(small_domain, small_grid)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
