import numpy as np
import pytest

from qsca.devicegen import TopologyShape, gen_device


@pytest.fixture(scope="session")
def h7():
    """The seed-0 H-shape reference device and library."""
    return gen_device(TopologyShape.HSHAPE, 7, 0)


@pytest.fixture(scope="session")
def line3():
    return gen_device(TopologyShape.LINE, 3, 0)


def rng(seed):
    return np.random.default_rng(seed)
