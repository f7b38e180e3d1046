import numpy as np
import pytest

from bergman_lab.geometry import sphere_model, torus_model
from bergman_lab.hilbert import build_frame


@pytest.fixture(scope="session")
def sphere():
    return sphere_model(1)


@pytest.fixture(scope="session")
def torus():
    return torus_model()


@pytest.fixture(scope="session")
def sphere_frames(sphere):
    return {k: build_frame(sphere, k) for k in (1, 2, 4, 8, 16, 24, 32, 48, 64)}


@pytest.fixture(scope="session")
def torus_frames(torus):
    return {k: build_frame(torus, k) for k in (1, 3, 8, 16, 24, 32, 48, 64)}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
