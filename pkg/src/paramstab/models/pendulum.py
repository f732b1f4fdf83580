"""Pendulum hanging from a spring-mounted support, with noisy gravity.

Generalised coordinates are the support displacement and the pendulum
angle. Units are cgs throughout.
"""
from dataclasses import asdict, dataclass

import numpy as np

from ..charfun import CharacteristicFunction, RankOneSystem
from ..linalg import companion_roots


@dataclass(frozen=True)
class PendulumParams:
    m_S: float = 10.0      # support mass, g
    m_P: float = 1.0       # bob mass, g
    ell: float = 5.0       # length, cm
    K_S: float = 4000.0    # spring constant, g/s^2
    gamma_S: float = 2.0   # support damping, g/s
    gamma_P: float = 50.0  # pendulum damping, g cm^2/s
    g0: float = 981.0      # mean gravity, cm/s^2

    def __post_init__(self):
        for k, val in asdict(self).items():
            if not (np.isfinite(val) and val > 0):
                raise ValueError(f"pendulum parameter {k} must be positive, got {val}")


def mck(p):
    """Mass, damping and stiffness blocks, plus the gravity-coupled stiffness."""
    M = np.array([[p.m_S + p.m_P, p.ell * p.m_P],
                  [p.ell * p.m_P, p.ell ** 2 * p.m_P]])
    C = np.diag([p.gamma_S, p.gamma_P])
    K0 = np.diag([p.K_S, p.g0 * p.ell])
    K1 = np.diag([0.0, p.ell])
    return M, C, K0, K1


def pendulum_system(p):
    """First-order form ``blockdiag(I, M) x' = [[0, I], [-K0, -C]] x``.

    The gravity fluctuation enters as ``A1 = u v^T`` with
    ``u = (0, 0, 0, -ell)`` and ``v = (0, 1, 0, 0)``.
    """
    M, C, K0, _ = mck(p)
    I2 = np.eye(2)
    Z = np.zeros((2, 2))
    B0 = np.block([[I2, Z], [Z, M]])
    A0 = np.block([[Z, I2], [-K0, -C]])
    u = np.array([0.0, 0.0, 0.0, -p.ell])
    v = np.array([0.0, 1.0, 0.0, 0.0])
    return RankOneSystem(B0, A0, u, v)


def h1_coeffs(p):
    """Ascending coefficients of ``h1``."""
    return np.array([p.K_S * p.ell, p.gamma_S * p.ell, p.ell * (p.m_P + p.m_S)])


def h0_coeffs(p):
    """Ascending coefficients of ``h0 = det(sigma B0 - A0)``."""
    c = np.zeros(5)
    c[4] = p.ell ** 2 * p.m_P * p.m_S
    c[3] = p.gamma_P * (p.m_P + p.m_S) + p.ell ** 2 * p.gamma_S * p.m_P
    c[2] = p.gamma_S * p.gamma_P + p.K_S * p.ell ** 2 * p.m_P
    c[1] = p.gamma_P * p.K_S
    c[:3] += p.g0 * h1_coeffs(p)
    return c


def _polyval(c, s):
    # ascending coefficients
    return np.polynomial.polynomial.polyval(s, c)


def pendulum_charfun(p):
    """Closed form ``f_A = h0 / h1`` with quotient-rule derivative."""
    c0, c1 = h0_coeffs(p), h1_coeffs(p)
    d0 = np.polynomial.polynomial.polyder(c0)
    d1 = np.polynomial.polynomial.polyder(c1)

    def value(s):
        return _polyval(c0, s) / _polyval(c1, s)

    def derivative(s):
        h1 = _polyval(c1, s)
        return (_polyval(d0, s) * h1 - _polyval(c0, s) * _polyval(d1, s)) / h1 ** 2

    def enumerate_(count=None):
        r = companion_roots(c0)
        scale = max(1.0, np.abs(r).max())
        idx = np.lexsort((-np.round(r.imag / scale, 12), -np.round(r.real / scale, 12)))
        r = r[idx]
        return r if count is None else r[:count]

    return CharacteristicFunction(value=value, derivative=derivative,
                                  kind="pendulum-closed-form", enumerator=enumerate_)


def random_params(rng):
    """A random parameter draw; damping is positive so the base is stable."""
    return PendulumParams(
        m_S=rng.uniform(1, 20), m_P=rng.uniform(0.2, 5), ell=rng.uniform(1, 10),
        K_S=rng.uniform(500, 8000), gamma_S=rng.uniform(0.5, 10),
        gamma_P=rng.uniform(5, 100), g0=rng.uniform(900, 1100))
