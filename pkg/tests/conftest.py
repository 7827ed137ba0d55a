import numpy as np
import pytest

from filippov3d import catalog


@pytest.fixture(scope="session")
def systems():
    return catalog()


@pytest.fixture(scope="session")
def sphere_ff(systems):
    return systems["sphere-two-foldfold"].system


@pytest.fixture(scope="session")
def degenerate_sphere(systems):
    return systems["degenerate-sphere"].system


@pytest.fixture(scope="session")
def planar_node(systems):
    return systems["planar-node"].system


@pytest.fixture(scope="session")
def elliptic_pair(systems):
    return systems["planar-elliptic-foldfold"].system


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def central_diff(fn, p, i, h=1e-6):
    """Finite-difference oracle for first partials; tests only."""
    e = np.zeros(3)
    e[i] = h
    return (fn(p + e) - fn(p - e)) / (2 * h)
