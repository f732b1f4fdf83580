"""Dispersion relations for viscous capillary-gravity waves on a layer.

The characteristic function is normalised so that a gravity modulation
``g0 -> g0 + eps f(t)`` turns ``F(sigma) = 0`` into ``F(sigma) + eps = 0``;
``F`` therefore carries the mean gravity ``g0`` as an additive constant.

Finite depth uses ``m = sqrt(sigma/nu + alpha^2)``. ``F`` is even in ``m``,
so the branch of the square root does not matter. Everything is written in
terms of ``exp(-2 m L)`` so large arguments do not overflow.
"""
import math
from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np
from scipy import optimize

from ..charfun import CharacteristicFunction, find_roots
from ..errors import BranchCutError, SeedExhaustedError

BRANCH_RTOL = 1e-12
GRID_PER_LOBE = 40


@dataclass(frozen=True)
class FaradayParams:
    rho: float = 0.95     # g/cm^3
    nu: float = 0.1       # cm^2/s
    T: float = 70.0       # g/s^2
    g0: float = 1000.0    # cm/s^2
    alpha: float = 5.0    # 1/cm
    depth: Optional[float] = None  # cm; None means infinitely deep

    def __post_init__(self):
        for k, val in asdict(self).items():
            if k == "depth":
                continue
            if not (np.isfinite(val) and val > 0):
                raise ValueError(f"Faraday parameter {k} must be positive, got {val}")
        if self.depth is not None:
            if math.isinf(self.depth):
                object.__setattr__(self, "depth", None)
            elif not self.depth > 0:
                raise ValueError(f"depth must be positive, got {self.depth}")

    @property
    def infinite(self):
        return self.depth is None

    @property
    def tau(self):
        return self.T * self.alpha ** 2 + self.rho * self.g0

    def with_depth(self, depth):
        return replace(self, depth=depth)


def inviscid_frequency(p):
    w2 = p.g0 * p.alpha + p.T * p.alpha ** 3 / p.rho
    if not p.infinite:
        w2 *= math.tanh(p.alpha * p.depth)
    return math.sqrt(w2)


# ---- infinite depth -------------------------------------------------------

def _check_cut(p, s):
    w = np.asarray(s, dtype=complex) + p.nu * p.alpha ** 2
    on_cut = (w.real < 0) & (np.abs(w.imag) <= BRANCH_RTOL * np.abs(w))
    if np.any(on_cut):
        raise BranchCutError("sigma + nu alpha^2 lies on the negative real axis")


def fd_infinite(p, s):
    """Deep-water ``F(sigma)`` and ``F'(sigma)``, principal square root."""
    _check_cut(p, s)
    s = np.asarray(s, dtype=complex)
    al, nu = p.alpha, p.nu
    r = np.sqrt(s + nu * al ** 2)
    q = s + 2 * nu * al ** 2
    F = q ** 2 / al - 4 * al ** 2 * nu ** 1.5 * r + p.T * al ** 2 / p.rho + p.g0
    dF = 2 * q / al - 2 * al ** 2 * nu ** 1.5 / r
    return F, dF


# ---- finite depth ---------------------------------------------------------

def fd_finite(p, s):
    """Finite-depth ``F(sigma)`` and ``F'(sigma)``, vectorised.

    ``F = H0 / (rho H1) + g0`` where ``H0`` and ``H1`` are the parts of the
    boundary determinant without and with ``g0``, after removing a common
    factor ``i exp((alpha + m) L)``.
    """
    s = np.asarray(s, dtype=complex)
    al, nu, L, rho, T = p.alpha, p.nu, p.depth, p.rho, p.T
    m = np.sqrt(s / nu + al ** 2)
    E = np.exp(-2 * m * L)
    X = np.exp(-(al + m) * L)
    ea = math.exp(-2 * al * L)
    sm, cm = (1 - E) / 2, (1 + E) / 2
    sa, ca = (1 - ea) / 2, (1 + ea) / 2
    dsm, dcm = L * E, -L * E
    dc = s ** 2 + 4 * al ** 2 * nu * s + 8 * al ** 4 * nu ** 2
    ddc = 2 * s + 4 * al ** 2 * nu
    ds = -dc - 4 * al ** 2 * nu * s
    dds = -ddc - 4 * al ** 2 * nu
    dt = -al / rho
    dsdm = 2 * nu * m
    q = 2 * al ** 2 * nu + s
    d0 = -4 * al ** 2 * nu * m * q * X
    dd0 = -4 * al ** 2 * nu * (q * X + m * dsdm * X - m * q * L * X)
    w = al * ca * sm - m * sa * cm
    dw = al * ca * dsm - sa * cm - m * sa * dcm
    H0 = d0 + al * ds * sa * sm + m * dc * ca * cm + T * al ** 2 * dt * w
    dH0 = (dd0 + al * sa * (dds * dsdm * sm + ds * dsm)
           + ca * (dc * cm + m * ddc * dsdm * cm + m * dc * dcm) + T * al ** 2 * dt * dw)
    H1 = dt * w
    dH1 = dt * dw
    F = H0 / (rho * H1) + p.g0
    # d/dsigma = (d/dm) / (dsigma/dm)
    dF = (dH0 * H1 - H0 * dH1) / (rho * H1 ** 2) / dsdm
    return F, dF


def det_finite(p, s):
    """Pole-free finite-depth determinant ``D(sigma)`` and ``D'(sigma)``.

    ``D = H / (i m cosh(alpha L))`` is entire in ``sigma`` (even in ``m``) and
    shares the zeros of ``F`` apart from a spurious zero at ``sigma = 0``.
    Unlike ``F`` it has no poles next to the overdamped zeros, which makes it
    the better target for Newton iteration.
    """
    s = np.asarray(s, dtype=complex)
    al, nu, L = p.alpha, p.nu, p.depth
    m = np.sqrt(s / nu + al ** 2)
    th = math.tanh(al * L)
    ch = np.cosh(m * L)
    sh = np.sinh(m * L)
    small = np.abs(m * L) < 1e-4
    msafe = np.where(small, 1.0, m)
    # sinh(mL)/m and its m-derivative, with series near m = 0
    shm = np.where(small, L * (1 + (m * L) ** 2 / 6), sh / msafe)
    dshm = np.where(small, L ** 3 * m / 3, (L * ch * m - sh) / msafe ** 2)
    dsdm = 2 * nu * m
    dc = s ** 2 + 4 * al ** 2 * nu * s + 8 * al ** 4 * nu ** 2
    ddc = 2 * s + 4 * al ** 2 * nu
    ds = -dc - 4 * al ** 2 * nu * s
    dds = -ddc - 4 * al ** 2 * nu
    dt = -al / p.rho
    q = 2 * al ** 2 * nu + s
    ca = 1.0 / math.cosh(al * L)
    D = (-4 * al ** 2 * nu * q * ca + al * ds * th * shm + dc * ch
         + p.tau * dt * (al * shm - th * ch))
    # d/dsigma of the explicit sigma dependence plus chain rule through m
    dD_s = -4 * al ** 2 * nu * ca + al * dds * th * shm + ddc * ch
    dD_m = al * ds * th * dshm + dc * L * sh + p.tau * dt * (al * dshm - th * L * sh)
    safe = np.where(dsdm == 0, 1.0, dsdm)
    dD = dD_s + np.where(dsdm == 0, 0.0, dD_m / safe)
    return D, dD


def determinant_charfun(p):
    """Finite-depth determinant as a :class:`CharacteristicFunction` (root finding only)."""
    if p.infinite:
        raise ValueError("determinant form needs a finite depth")

    def joint(s):
        D, dD = det_finite(p, s)
        return complex(D), complex(dD)

    return CharacteristicFunction(value=lambda s: det_finite(p, s)[0],
                                  derivative=lambda s: det_finite(p, s)[1],
                                  kind="faraday-finite-determinant",
                                  value_and_derivative=joint)


def shear_residual(p, beta):
    """Real function whose positive zeros ``beta`` give the overdamped modes.

    On ``sigma = -nu (alpha^2 + beta^2)`` the finite-depth determinant is
    purely imaginary; this is its imaginary part divided by
    ``cosh(alpha L)``.
    """
    al, nu, L, rho = p.alpha, p.nu, p.depth, p.rho
    b = np.asarray(beta, dtype=float)
    s = -nu * (b ** 2 + al ** 2)
    th = math.tanh(al * L)
    dc = s ** 2 + 4 * al ** 2 * nu * s + 8 * al ** 4 * nu ** 2
    ds = -dc - 4 * al ** 2 * nu * s
    dt = -al / rho
    d0 = -4 * al ** 2 * b * nu * (2 * al ** 2 * nu + s) / math.cosh(al * L)
    sb, cb = np.sin(b * L), np.cos(b * L)
    return (d0 + al * ds * th * sb + b * dc * cb
            + p.tau * dt * (al * sb - b * th * cb))


def shear_roots(p, count):
    """First ``count`` overdamped eigenvalues, by increasing decay rate."""
    L = p.depth
    found = np.empty(0)
    lobes = count + 3
    while True:
        bmax = lobes * np.pi / L
        grid = np.linspace(1e-9 / L, bmax, GRID_PER_LOBE * lobes + 1)
        hv = shear_residual(p, grid)
        idx = np.nonzero(np.sign(hv[:-1]) != np.sign(hv[1:]))[0]
        found = np.array([optimize.brentq(lambda b: float(shear_residual(p, b)),
                                          grid[i], grid[i + 1], xtol=1e-300, rtol=1e-15)
                          for i in idx])
        if found.size >= count:
            break
        lobes *= 2
    beta = found[:count]
    return -p.nu * (beta ** 2 + p.alpha ** 2) + 0j


def surface_pair(cf, p):
    """The weakly damped travelling-wave pair, upper root first."""
    seed = -2 * p.nu * p.alpha ** 2 + 1j * inviscid_frequency(p)
    r = find_roots(cf, [seed], 1)[0]
    if r.imag < 0:
        r = r.conjugate()
    return np.array([r, r.conjugate()])


def faraday_charfun(p):
    """Characteristic function for the finite- or infinite-depth layer.

    Roots are listed as the surface pair (positive imaginary part first),
    then the overdamped shear modes by increasing decay rate. The deep layer
    has a continuous spectrum, so only the surface pair is enumerable.
    """
    if p.infinite:
        fdf = lambda s: fd_infinite(p, s)
        kind = "faraday-infinite"
    else:
        fdf = lambda s: fd_finite(p, s)
        kind = "faraday-finite"

    def value(s):
        F = fdf(s)[0]
        return F if np.ndim(F) else complex(F)

    def derivative(s):
        dF = fdf(s)[1]
        return dF if np.ndim(dF) else complex(dF)

    def joint(s):
        F, dF = fdf(s)
        return complex(F), complex(dF)

    cache = {}

    def enumerate_(count=None):
        if "surface" not in cache:
            cache["surface"] = surface_pair(cf, p)
        sp = cache["surface"]
        if count is None:
            count = 2 if p.infinite else 40
        if count <= 2:
            return sp[:count]
        if p.infinite:
            raise SeedExhaustedError("deep layer has a continuous spectrum; only the "
                                     "surface pair is enumerable", roots=sp)
        if cache.get("shear") is None or cache["shear"].size < count - 2:
            cache["shear"] = shear_roots(p, count - 2)
        return np.concatenate([sp, cache["shear"][:count - 2]])

    cf = CharacteristicFunction(value=value, derivative=derivative, kind=kind,
                                enumerator=enumerate_, value_and_derivative=joint)
    return cf


def shear_seeds(p, count):
    """Seeds ``-nu (alpha^2 + (k pi / L)^2)`` for the overdamped branch."""
    k = np.arange(1, count + 1)
    return -p.nu * (p.alpha ** 2 + (k * np.pi / p.depth) ** 2) + 0j
