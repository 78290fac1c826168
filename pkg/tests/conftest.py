import numpy as np
import pytest

from rotwaves.params import Params
from rotwaves.spectral import Grid


@pytest.fixture(scope="session")
def grid64():
    return Grid(64, 32)


@pytest.fixture(scope="session")
def small_grid():
    return Grid(32, 12)


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


@pytest.fixture
def params():
    return Params(eps=0.1, beta=0.1, mu=0.04, ro=1.0)


def smooth_field(grid, rng, modes=4, amp=1.0):
    """Random trigonometric polynomial well inside the dealiased band."""
    f = np.zeros(grid.nx)
    for k in range(1, modes + 1):
        a, b = rng.standard_normal(2) * amp / k**2
        f += a * np.cos(k * grid.x) + b * np.sin(k * grid.x)
    return f
