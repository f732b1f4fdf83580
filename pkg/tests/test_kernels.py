import numpy as np
import pytest
from numpy.testing import assert_allclose

from paramstab import _kernels
from paramstab.linalg import eig_general
from paramstab.models.pendulum import PendulumParams, pendulum_system
from paramstab.spectral import NoisePsd
from paramstab.stability import chi_full

from conftest import BACKENDS

needs_numba = pytest.mark.skipif(_kernels.NUMBA is None, reason="numba not installed")


def test_backend_lookup():
    assert _kernels.backend("numpy") is _kernels.NUMPY
    assert _kernels.backend() is _kernels.active
    with pytest.raises(ValueError):
        _kernels.backend("fortran")


def test_flag_parsing(monkeypatch):
    for val, want in (("0", False), ("false", False), ("no", False), ("1", True), ("", True)):
        monkeypatch.setenv("PARAMSTAB_USE_NUMBA", val)
        assert _kernels._flag_enabled() is want


@needs_numba
def test_rational_sum_agrees(rng):
    z = rng.standard_normal(200) + 1j * rng.standard_normal(200)
    ps = NoisePsd(1.0, 10.0).poleset
    a = _kernels.NUMPY.rational_sum(z, ps.poles, ps.residues)
    b = _kernels.NUMBA.rational_sum(z, ps.poles, ps.residues)
    # terms may cancel, so compare against the size of the terms
    scale = np.abs(ps.residues[None, :] / (z[:, None] - ps.poles[None, :])).sum(axis=1)
    assert np.all(np.abs(a - b) <= 1e-14 * scale)


@needs_numba
def test_deflation_sum_agrees(rng):
    roots = rng.standard_normal(12) + 1j * rng.standard_normal(12)
    s = 0.3 + 0.7j
    assert_allclose(_kernels.NUMPY.deflation_sum(s, roots),
                    _kernels.NUMBA.deflation_sum(s, roots), rtol=1e-14)
    assert _kernels.NUMBA.deflation_sum(s, roots[:0]) == 0


@needs_numba
def test_hqr_agrees(rng):
    H = np.triu(rng.standard_normal((15, 15)) + 1j * rng.standard_normal((15, 15)), -1)
    a, oka = _kernels.NUMPY.hqr_eigvals(H.copy(), 900)
    b, okb = _kernels.NUMBA.hqr_eigvals(H.copy(), 900)
    assert oka and okb
    ref = np.linalg.eigvals(H)
    for ev in (a, b):
        assert np.max(np.min(np.abs(ev[:, None] - ref[None, :]), axis=1)) < 1e-10


@needs_numba
def test_lambda2_double_agrees():
    sys = pendulum_system(PendulumParams())
    eig = eig_general(sys.A0, sys.B0)
    X = chi_full(eig, sys.A1)
    ps = NoisePsd(1.0, 10.0).poleset
    for p, q in ((0, 0), (0, 1), (1, 3)):
        a = _kernels.NUMPY.lambda2_double(X, eig.sigma, p, q, ps.poles, ps.residues)
        b = _kernels.NUMBA.lambda2_double(X, eig.sigma, p, q, ps.poles, ps.residues)
        assert_allclose(a, b, rtol=1e-13)


def test_backends_listed():
    assert "numpy" in BACKENDS
