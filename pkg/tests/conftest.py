import numpy as np
import pytest

from charon import fixtures
from charon.network import Network


@pytest.fixture
def robust_net():
    return fixtures.robust_net()


@pytest.fixture
def xor_net():
    return fixtures.xor_net()


@pytest.fixture
def zono_net():
    return fixtures.zonotope_net()


def small_random_net(rng, n_in, hidden=(4,), n_out=2, bias_scale=0.5):
    dims = [n_in, *hidden, n_out]
    ws = [rng.normal(size=(b, a)) / np.sqrt(a) for a, b in zip(dims[:-1], dims[1:])]
    bs = [rng.normal(scale=bias_scale, size=b) for b in dims[1:]]
    return Network.from_arrays(ws, bs)
