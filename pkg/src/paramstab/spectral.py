"""Narrow-band noise model with an eighth-order rational spectral density.

``S(w) = w^4 a^3 / (pi A_nor) * [1/(a^8 + (w - w0)^8) + 1/(a^8 + (w + w0)^8)]``

and the extended spectral density ``G(z) = (1/2pi) int S(w)/(z - i w) dw``,
the one-sided Laplace transform of the autocorrelation. ``G`` is rational
with eight poles in the left half plane, so it is stored as a pole/residue
list and every other quantity is derived from that.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import _kernels
from .errors import AtPoleError, QuadratureFailureError

# gamma_k = i exp(-3 i pi / 8) exp(i k pi / 4), k = 0..3; the upper-half-plane
# roots of g^8 = -1 after the change of variable w = w0 + a g
GAMMA = 1j * np.exp(-3j * np.pi / 8) * np.exp(1j * np.arange(4) * np.pi / 4)

MERGE_RTOL = 1e-12


def a_nor(a, omega0):
    """Normalisation constant making the density integrate to one."""
    r = omega0 / a
    return ((1 + np.sqrt(2)) * r ** 4 + 6 * r ** 2 + 1) * np.sqrt(1 - 1 / np.sqrt(2))


@dataclass(frozen=True)
class PoleSet:
    poles: np.ndarray
    residues: np.ndarray

    def __post_init__(self):
        self.poles.setflags(write=False)
        self.residues.setflags(write=False)

    def __len__(self):
        return self.poles.shape[0]


@dataclass(frozen=True)
class NoisePsd:
    """Two-parameter spectral model.

    Parameters
    ----------
    a : float
        Bandwidth, rad/s, positive.
    omega0 : float
        Centre frequency, rad/s, nonnegative.
    """
    a: float
    omega0: float = 0.0
    a_nor: float = field(init=False)
    poleset: PoleSet = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (np.isfinite(self.a) and self.a > 0):
            raise ValueError(f"bandwidth a must be positive, got {self.a}")
        if not (np.isfinite(self.omega0) and self.omega0 >= 0):
            raise ValueError(f"omega0 must be nonnegative, got {self.omega0}")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "omega0", float(self.omega0))
        object.__setattr__(self, "a_nor", float(a_nor(self.a, self.omega0)))
        object.__setattr__(self, "poleset", _build_poles(self))

    def S(self, omega):
        return psd_eval(self, omega)

    def G(self, z):
        return gz_closed(self, z)


def psd_eval(model, omega):
    """Spectral density ``S(omega)``; vectorised over ``omega``."""
    w = np.asarray(omega, dtype=float)
    a, w0 = model.a, model.omega0
    a8 = a ** 8
    val = w ** 4 * a ** 3 / (np.pi * model.a_nor) * (
        1.0 / (a8 + (w - w0) ** 8) + 1.0 / (a8 + (w + w0) ** 8))
    return val if val.ndim else float(val)


def _build_poles(model):
    a, w0 = model.a, model.omega0
    pref = 1.0 / (8j * np.pi * a ** 4 * model.a_nor)
    mus, rs = [], []
    for sgn in (1.0, -1.0):
        c = a * GAMMA + sgn * w0
        mus.extend(1j * c)
        rs.extend(GAMMA * c ** 4 * pref)
    poles, res = [], []
    tol = MERGE_RTOL * a
    for mu, r in zip(mus, rs):
        for i, p in enumerate(poles):
            if abs(p - mu) <= tol:
                res[i] += r
                break
        else:
            poles.append(mu)
            res.append(r)
    return PoleSet(np.array(poles, dtype=complex), np.array(res, dtype=complex))


def poles_residues(model):
    """Poles ``mu_m`` and residues ``r_m`` of ``G``.

    Eight entries in general. When ``omega0 == 0`` the two sidebands share
    poles and coincident entries (within ``1e-12 a``) are merged by summing
    residues, leaving four.
    """
    return model.poleset


def _check_not_pole(model, z):
    tol = MERGE_RTOL * model.a
    d = np.abs(np.asarray(z)[..., None] - model.poleset.poles)
    if np.any(d <= tol):
        raise AtPoleError("G evaluated at one of its poles")


def rational_eval(poleset, z):
    """``sum_m r_m / (z - mu_m)`` vectorised over ``z`` (no pole check)."""
    z = np.asarray(z, dtype=complex)
    flat = np.ascontiguousarray(z.ravel())
    out = _kernels.active.rational_sum(flat, np.ascontiguousarray(poleset.poles),
                                       np.ascontiguousarray(poleset.residues))
    out = out.reshape(z.shape)
    return out if out.ndim else complex(out)


def gz_closed(model, z):
    """Extended spectral density in closed form.

    Evaluates ``(G0(z, w0) + G0(z, -w0)) / (8 i pi a^4 A_nor)`` with
    ``G0(z, w0) = sum_k gamma_k (a gamma_k + w0)^4 / (z - i(a gamma_k + w0))``,
    which is the partial-fraction form stored in the model's pole set.

    Raises
    ------
    AtPoleError
        If ``z`` is within ``1e-12 a`` of a pole.
    """
    _check_not_pole(model, z)
    return rational_eval(model.poleset, z)


def gz_quadrature(model, z, epsabs=1e-13, epsrel=1e-11, limit=2000):
    """Independent evaluation of ``G(z)`` from its integral definition.

    Valid for ``Re z > 0``. The line is split at ``+-(omega0 + 50 a)``; the
    core is integrated with break points at the spectral peaks and the two
    tails on infinite intervals.
    """
    z = complex(z)
    if not z.real > 0:
        raise ValueError("integral representation needs Re z > 0")
    a, w0 = model.a, model.omega0
    W = w0 + 50.0 * a
    brk = sorted({x for x in (-w0, w0, 0.0, z.imag) if -W < x < W})

    def part(fn):
        total, err = 0.0, 0.0
        opts = dict(epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1)
        for lo, hi in ((-np.inf, -W), (W, np.inf)):
            v, e, *info = integrate.quad(fn, lo, hi, **opts)
            total += v
            err += e
        v, e, *info = integrate.quad(fn, -W, W, points=brk, **opts)
        total += v
        err += e
        return total, err

    def integrand(w):
        return psd_eval(model, w) / (z - 1j * w)

    re, e1 = part(lambda w: integrand(w).real)
    im, e2 = part(lambda w: integrand(w).imag)
    val = (re + 1j * im) / (2 * np.pi)
    err = (e1 + e2) / (2 * np.pi)
    if not np.isfinite(val) or err > 1e3 * max(epsabs, epsrel * abs(val)):
        raise QuadratureFailureError(f"quadrature error estimate {err:.2e} too large")
    return complex(val)


def psd_integral(model, epsabs=1e-14, epsrel=1e-12):
    """``int S(w) dw`` over the real line by adaptive quadrature."""
    a, w0 = model.a, model.omega0
    W = w0 + 50.0 * a
    pts = sorted({-w0, 0.0, w0})
    f = lambda w: psd_eval(model, w)
    core = integrate.quad(f, -W, W, points=pts, epsabs=epsabs, epsrel=epsrel, limit=2000)[0]
    tails = 2 * integrate.quad(f, W, np.inf, epsabs=epsabs, epsrel=epsrel, limit=2000)[0]
    return core + tails


def acf_eval(poleset, tau):
    """Autocorrelation ``R(tau) = sum_m r_m exp(mu_m tau)`` for ``tau >= 0``."""
    t = np.asarray(tau, dtype=float)
    if np.any(t < 0):
        raise ValueError("tau must be nonnegative")
    val = (poleset.residues * np.exp(np.multiply.outer(t, poleset.poles))).sum(axis=-1)
    return val if np.ndim(val) else complex(val)
