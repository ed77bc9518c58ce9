import numpy as np
import pytest

import lshlab as L


@pytest.fixture(scope="session")
def gauss1():
    return L.gaussian(1.0, 1)


@pytest.fixture(scope="session")
def gauss2():
    return L.gaussian(1.0, 2)


@pytest.fixture(scope="session")
def gh_spec(gauss1):
    return L.default_spec(gauss1)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240211)
