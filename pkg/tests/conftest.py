import numpy as np
import pytest

from paramstab import _kernels
from paramstab.models import PendulumParams, pendulum_charfun, pendulum_system
from paramstab.spectral import NoisePsd

BACKENDS = ["numpy"] + (["numba"] if _kernels.NUMBA is not None else [])


@pytest.fixture(params=BACKENDS)
def kernel_backend(request, monkeypatch):
    """Run the test once per kernel implementation."""
    monkeypatch.setattr(_kernels, "active", _kernels.backend(request.param))
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def pendulum():
    p = PendulumParams()
    return p, pendulum_system(p), pendulum_charfun(p)


@pytest.fixture(scope="session")
def psd():
    return NoisePsd(1.0, 10.0)


def random_spd(rng, n):
    X = rng.standard_normal((n, n))
    return X @ X.T + n * np.eye(n)


def sort_roots(z):
    """Sort by real then imaginary part, rounded so conjugate ties are stable."""
    z = np.asarray(z)
    return z[np.lexsort((np.round(z.imag, 6), np.round(z.real, 6)))]
