import numpy as np
import pytest

from nskfluid import ModelParameters


@pytest.fixture
def grid():
    return np.linspace(-10.0, 10.0, 4001)


@pytest.fixture
def viscous_params():
    # kappa = 1, xi = 0.2, nu = 1
    return ModelParameters.from_transport(1.0, 0.2, 1.0)
