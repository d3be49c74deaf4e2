import numpy as np
import pytest

from gpelab.grid import Grid2D
from gpelab.townes import solve_townes

A_STAR_REF = 11.700896519147955
Q0_REF = 2.2062008653010707


@pytest.fixture(scope="session")
def profile():
    return solve_townes()


@pytest.fixture(scope="session")
def grid256():
    return Grid2D(12.0, 256)


@pytest.fixture(scope="session")
def grid128():
    return Grid2D(8.0, 128)
