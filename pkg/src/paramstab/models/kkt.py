"""Constrained first-order systems ``M0 u' = (K0 + eps f K1) u + C^T p``, ``C u = 0``.

The constraint is removed by projecting onto an orthonormal basis ``P`` of
the null space of ``C``; the reduced mass ``P^T M0 P`` is then SPD.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from ..charfun import RankOneSystem
from ..errors import RankDeficientConstraintError
from ..linalg import EigenData


@dataclass(frozen=True)
class KktSystem:
    """Saddle-point system with rank-one forcing ``K1 = a b^T``."""
    M0: np.ndarray
    K0: np.ndarray
    C: np.ndarray
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        for name in ("M0", "K0", "C"):
            object.__setattr__(self, name, np.atleast_2d(np.asarray(getattr(self, name), float)))
        for name in ("a", "b"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), float).ravel())
        n = self.M0.shape[0]
        if self.M0.shape != (n, n) or self.K0.shape != (n, n):
            raise ValueError("M0 and K0 must be square and of equal order")
        if self.C.shape[1] != n or self.C.shape[0] >= n:
            raise ValueError("C must have fewer rows than columns and match M0")
        if self.a.shape != (n,) or self.b.shape != (n,):
            raise ValueError("forcing vectors a and b must match M0")

    @property
    def K1(self):
        return np.outer(self.a, self.b)

    def full_pencil(self):
        """``(B0, A0, A1)`` of the singular-mass saddle-point pencil."""
        n, r = self.M0.shape[0], self.C.shape[0]
        Z = np.zeros((r, r))
        B0 = np.block([[self.M0, np.zeros((n, r))], [np.zeros((r, n)), Z]])
        A0 = np.block([[self.K0, self.C.T], [self.C, Z]])
        A1 = np.zeros((n + r, n + r))
        A1[:n, :n] = self.K1
        return B0, A0, A1


def null_space_basis(C, rtol=1e-12):
    """``(Q, P)``: orthonormal bases of range(C^T) and its complement.

    Raises
    ------
    RankDeficientConstraintError
        If a diagonal entry of the triangular factor of ``C^T`` is below
        ``rtol`` times the largest.
    """
    C = np.atleast_2d(np.asarray(C, float))
    r = C.shape[0]
    Qf, R = sla.qr(C.T, mode="full")
    d = np.abs(np.diag(R))
    if d.size < r or d.min() <= rtol * max(d.max(), np.finfo(float).tiny):
        raise RankDeficientConstraintError("constraint matrix does not have full row rank")
    return Qf[:, :r], Qf[:, r:]


def kkt_reduce(k):
    """Project a :class:`KktSystem` onto the constraint null space.

    Returns
    -------
    system : RankOneSystem
        ``(P^T M0 P, P^T K0 P, P^T a, P^T b)``.
    P : ndarray
        The null-space basis, for lifting eigenvectors back.
    """
    _, P = null_space_basis(k.C)
    Mr = P.T @ k.M0 @ P
    Mr = 0.5 * (Mr + Mr.T)
    return RankOneSystem(Mr, P.T @ k.K0 @ P, P.T @ k.a, P.T @ k.b), P


def kkt_lift(k, P, eig):
    """Lift reduced eigenvectors to the full ``(u, p)`` space.

    The multiplier parts solve ``C^T p = sigma M0 u - K0 u`` (and the adjoint
    analogue) in the least-squares sense, which is exact for true eigenpairs.
    """
    def lift(Z, shifts, K):
        U = P @ Z
        rhs = k.M0 @ U * shifts - K @ U
        mult = np.linalg.lstsq(k.C.T, rhs, rcond=None)[0]
        return np.vstack([U, mult])

    phi = lift(eig.phi, eig.sigma, k.K0)
    psi = lift(eig.psi, eig.sigma.conj(), k.K0.T)
    return EigenData(sigma=eig.sigma.copy(), phi=phi, psi=psi)
