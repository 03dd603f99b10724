import numpy as np
import pytest

from polyball_lab.sampling import cfg_a, cfg_b, rng_for, torus_pair


@pytest.fixture
def lam_a():
    return cfg_a()


@pytest.fixture
def lam_b():
    return cfg_b()


@pytest.fixture
def rng():
    return rng_for(1234)


@pytest.fixture
def torus4():
    return torus_pair(4)


def assert_close(a, b, tol=1e-12):
    assert np.max(np.abs(np.asarray(a) - np.asarray(b))) <= tol
