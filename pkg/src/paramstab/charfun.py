"""Scalar characteristic functions for rank-one forced systems.

For ``A1 = u v^T`` the perturbed eigenvalues solve ``f_A(sigma) + eps = 0``
with ``1/f_A(sigma) = -v^T (sigma B0 - A0)^{-1} u``. A
:class:`CharacteristicFunction` wraps any such function (built from
matrices, from a closed form, or from a dispersion relation) together with
its derivative and a way to list its zeros.
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from . import _kernels
from .errors import (DegenerateModeError, NearEigenvalueError, SeedExhaustedError,
                     SingularMatrixError)
from .linalg import cholesky, eig_general, solve

log = logging.getLogger(__name__)

NEWTON_MAXIT = 60
STEP_RTOL = 1e-12
RESID_RTOL = 1e-10
DISTINCT_ATOL = 1e-8
DEGENERATE_RTOL = 1e-8
NEAR_ZERO_RTOL = 1e-7


@dataclass(frozen=True)
class RankOneSystem:
    """``B0 x' = (A0 + eps f(t) u v^T) x`` with ``B0`` SPD."""
    B0: np.ndarray
    A0: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        B0 = np.array(self.B0, dtype=float)
        A0 = np.array(self.A0)
        A0 = A0.astype(complex if np.iscomplexobj(A0) else float)
        u = np.array(self.u).ravel()
        v = np.array(self.v).ravel()
        n = B0.shape[0]
        if B0.shape != (n, n) or A0.shape != (n, n) or u.shape != (n,) or v.shape != (n,):
            raise ValueError("inconsistent dimensions in rank-one system")
        if not np.any(u) or not np.any(v):
            raise ValueError("forcing factors u and v must be nonzero")
        cholesky(B0)
        for name, arr in (("B0", B0), ("A0", A0), ("u", u), ("v", v)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def order(self):
        return self.B0.shape[0]

    @property
    def A1(self):
        return np.outer(self.u, self.v)

    @cached_property
    def eigen(self):
        """Eigen data of the unforced pencil, computed once."""
        return eig_general(self.A0, self.B0)


@dataclass(frozen=True)
class CharacteristicFunction:
    """An evaluable ``f_A`` with derivative and root enumerator.

    Parameters
    ----------
    value, derivative : callable
        ``f_A(sigma)`` and ``f_A'(sigma)``.
    kind : str
        ``matrix``, ``pendulum-closed-form``, ``faraday-finite`` or
        ``faraday-infinite``.
    enumerator : callable, optional
        ``enumerator(count)`` returns ``count`` zeros in the model's
        preferred order.
    value_and_derivative : callable, optional
        Joint evaluation, used by Newton when cheaper than two calls.
    """
    value: Callable
    derivative: Callable
    kind: str
    enumerator: Optional[Callable] = None
    value_and_derivative: Optional[Callable] = None

    def __call__(self, sigma):
        return self.value(sigma)

    def fdf(self, sigma):
        if self.value_and_derivative is not None:
            return self.value_and_derivative(sigma)
        return self.value(sigma), self.derivative(sigma)

    def eigenvalues(self, count=None):
        if self.enumerator is None:
            raise NotImplementedError(f"{self.kind} function has no root enumerator")
        return np.asarray(self.enumerator(count), dtype=complex)


def _pencil(sys, sigma):
    return sigma * sys.B0 - sys.A0


def fa_matrix(sys, sigma):
    """``f_A(sigma) = -1 / (v^T (sigma B0 - A0)^{-1} u)``.

    Raises
    ------
    NearEigenvalueError
        If the shifted pencil is numerically singular.
    """
    try:
        x = solve(_pencil(sys, complex(sigma)), sys.u.astype(complex))
    except SingularMatrixError as exc:
        raise NearEigenvalueError(f"sigma={sigma} is at an eigenvalue") from exc
    g = sys.v @ x
    if g == 0:
        return complex(np.inf)
    return complex(-1.0 / g)


def _spectral_derivative(sys, sigma):
    # 1/f_A = -sum_j c_j / (sigma - sigma_j) with c_j = (v.phi_j)(psi_j^H u);
    # scaling out the nearest pole keeps the quotient accurate next to it
    eig = sys.eigen
    c = (sys.v @ eig.phi) * (eig.psi.conj().T @ sys.u)
    d = sigma - eig.sigma
    k = int(np.argmin(np.abs(d)))
    rest = np.arange(d.size) != k
    h = c[k] + d[k] * np.sum(c[rest] / d[rest])
    dh = -c[k] - d[k] ** 2 * np.sum(c[rest] / d[rest] ** 2)
    return complex(dh / h ** 2)


def fa_matrix_derivative(sys, sigma):
    """``f_A'(sigma) = -f_A^2 v^T R B0 R u`` with ``R = (sigma B0 - A0)^{-1}``.

    At or within about ``1e-7 (1 + |sigma|)`` of an eigenvalue the two solves
    lose directional accuracy; there the derivative comes from the
    partial-fraction expansion of ``1/f_A`` over the eigenpairs instead.
    """
    sigma = complex(sigma)
    P = _pencil(sys, sigma)
    try:
        x = solve(P, sys.u.astype(complex))
        y = solve(P.T, sys.v.astype(complex))
    except SingularMatrixError:
        return _spectral_derivative(sys, sigma)
    g = sys.v @ x
    d = complex(-(y @ (sys.B0 @ x)) / g ** 2)
    if abs(1.0 / g) <= NEAR_ZERO_RTOL * abs(d) * (1 + abs(sigma)):
        return _spectral_derivative(sys, sigma)
    return d


def matrix_charfun(sys):
    """Wrap a :class:`RankOneSystem` as a :class:`CharacteristicFunction`."""
    def enumerate_(count=None):
        sig = sys.eigen.sigma
        return sig if count is None else sig[:count]

    return CharacteristicFunction(
        value=lambda s: fa_matrix(sys, s),
        derivative=lambda s: fa_matrix_derivative(sys, s),
        kind="matrix",
        enumerator=enumerate_,
    )


def check_simple_zero(cf, sigma_p, dfp=None):
    """Return ``f_A'(sigma_p)`` after checking it is not degenerate."""
    sigma_p = complex(sigma_p)
    if dfp is None:
        dfp = complex(cf.derivative(sigma_p))
    delta = 1e-3 * (1 + abs(sigma_p))
    secant = abs(cf(sigma_p + delta) - cf(sigma_p - delta)) / (2 * delta)
    if not np.isfinite(dfp) or abs(dfp) <= DEGENERATE_RTOL * secant:
        raise DegenerateModeError(
            f"f_A'({sigma_p}) = {dfp} vanishes; zero is not simple")
    return dfp


def fp_from_fa(cf, sigma_p, sigma):
    """Mode-``p`` characteristic function ``f_p(sigma) = -f_A(sigma) f_A'(sigma_p)``."""
    dfp = check_simple_zero(cf, sigma_p)
    return -cf(sigma) * dfp


def newton_deflated(cf, seed, found, maxit=NEWTON_MAXIT):
    """Newton on ``f / prod(sigma - r_j)`` from ``seed``.

    Returns ``(root, converged, iterations)``.
    """
    found = np.asarray(found, dtype=complex)
    kern = _kernels.active
    s = complex(seed)
    for it in range(1, maxit + 1):
        f, df = cf.fdf(s)
        f, df = complex(f), complex(df)
        if not (np.isfinite(f) and np.isfinite(df)):
            return s, False, it
        corr = kern.deflation_sum(s, found) if found.size else 0.0
        den = df - f * corr
        if den == 0:
            return s, False, it
        step = f / den
        s = s - step
        if abs(step) <= STEP_RTOL * (1 + abs(s)):
            f1, df1 = cf.fdf(s)
            if abs(f1) <= RESID_RTOL * abs(df1) * (1 + abs(s)):
                return s, True, it
    return s, False, maxit


def find_roots(cf, seeds, count):
    """Zeros of ``cf`` by Newton with deflation of roots already found.

    Seeds are tried in order. A seed that fails to converge, or lands within
    ``1e-8`` of an earlier root, is skipped and logged.

    Returns
    -------
    ndarray of complex
        ``count`` roots in discovery order.

    Raises
    ------
    SeedExhaustedError
        If the seeds run out first; the partial list is attached as ``roots``.
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    roots = []
    for seed in seeds:
        if len(roots) >= count:
            break
        r, ok, it = newton_deflated(cf, seed, roots)
        if not ok:
            log.debug("seed %s did not converge in %d iterations", seed, it)
            continue
        if roots and np.min(np.abs(np.asarray(roots) - r)) <= DISTINCT_ATOL:
            log.debug("seed %s repeated root %s", seed, r)
            continue
        roots.append(r)
    if len(roots) < count:
        raise SeedExhaustedError(
            f"found {len(roots)} of {count} roots", roots=np.array(roots, dtype=complex))
    return np.array(roots, dtype=complex)


def argument_count(cf, center, radius, n=2048):
    """Winding number of ``cf`` around a circle (zeros minus poles inside).

    Diagnostic only; uses the trapezoid rule on ``f'/f``.
    """
    t = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    z = center + radius * np.exp(1j * t)
    dz = 1j * radius * np.exp(1j * t)
    vals = np.array([complex(cf.derivative(zi)) / complex(cf(zi)) for zi in z])
    return float(np.real(np.sum(vals * dz) * (2 * np.pi / n) / (2j * np.pi)))
