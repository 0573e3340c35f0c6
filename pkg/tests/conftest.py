import numpy as np
import pytest

from dbmlab.semicircle import typical_locations


@pytest.fixture(scope="session")
def table100():
    return typical_locations(100)


@pytest.fixture(scope="session")
def table500():
    return typical_locations(500)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
