"""Dense linear algebra for the generalized eigenproblem ``A0 phi = sigma B0 phi``.

The mass matrix is assumed symmetric positive definite, so the pencil is
reduced to a standard problem with a Cholesky factor. Adjoint eigenvectors
are bi-orthonormalized under the B0-weighted inner product
``<psi, phi>_B = psi^H B0 phi``.
"""
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import _kernels
from .errors import (DefectivePencilError, DegreeZeroError, NoConvergenceError,
                     NotSpdError, SingularMatrixError)

DEFAULT_TOL = 1e-10


def _as_matrix(A, name="matrix"):
    A = np.asarray(A)
    if A.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def cholesky(B):
    """Lower Cholesky factor of a real symmetric positive definite matrix.

    Parameters
    ----------
    B : array_like, shape (n, n)

    Returns
    -------
    L : ndarray
        Lower triangular with ``L @ L.T == B``.

    Raises
    ------
    NotSpdError
        If ``B`` is not symmetric or a pivot is not positive.
    """
    B = _as_matrix(B, "B")
    if B.shape[0] != B.shape[1]:
        raise NotSpdError("mass matrix is not square")
    if np.iscomplexobj(B):
        if np.any(np.abs(B.imag) > 0):
            raise NotSpdError("mass matrix must be real")
        B = B.real
    B = B.astype(float)
    scale = max(np.abs(B).max(), np.finfo(float).tiny)
    if np.abs(B - B.T).max() > 1e-12 * scale:
        raise NotSpdError("mass matrix is not symmetric")
    try:
        return np.linalg.cholesky(0.5 * (B + B.T))
    except np.linalg.LinAlgError as exc:
        raise NotSpdError("mass matrix is not positive definite") from exc


def solve(A, b, rcond=None):
    """Solve ``A x = b`` by LU with partial pivoting.

    A tiny pivot relative to the largest entry of ``A`` is treated as
    singularity, which in practice means the shift sits on an eigenvalue.

    Raises
    ------
    SingularMatrixError
    """
    A = _as_matrix(A, "A")
    if A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    n = A.shape[0]
    if rcond is None:
        rcond = n * np.finfo(float).eps
    with warnings.catch_warnings():
        # exact zero pivots are reported below as SingularMatrixError
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(A, check_finite=False)
    d = np.abs(np.diag(lu))
    scale = np.abs(A).max()
    if scale == 0.0 or d.min() <= rcond * scale:
        raise SingularMatrixError(
            f"pivot {d.min():.3e} below threshold {rcond * scale:.3e}")
    return sla.lu_solve((lu, piv), b, check_finite=False)


@dataclass(frozen=True)
class EigenData:
    """Generalized eigenpairs with B0-bi-orthonormal adjoints.

    ``phi[:, k]`` and ``psi[:, k]`` are the right and adjoint eigenvectors for
    ``sigma[k]``. They satisfy ``psi[:, i].conj() @ B0 @ phi[:, j] == delta_ij``.
    """
    sigma: np.ndarray
    phi: np.ndarray
    psi: np.ndarray

    @property
    def order(self):
        return self.sigma.shape[0]

    def __post_init__(self):
        for arr in (self.sigma, self.phi, self.psi):
            arr.setflags(write=False)


def _order_eigs(sigma):
    # descending real part, then descending imaginary part; rounding the keys
    # keeps conjugate partners adjacent despite last-bit noise
    scale = max(1.0, np.abs(sigma).max())
    re = np.round(sigma.real / scale, 12)
    im = np.round(sigma.imag / scale, 12)
    return np.lexsort((-im, -re))


def eig_general(A0, B0, tol=DEFAULT_TOL):
    """Generalized eigenvalues and bi-orthonormal eigenvectors.

    Parameters
    ----------
    A0 : array_like, shape (n, n)
    B0 : array_like, shape (n, n)
        Symmetric positive definite.
    tol : float
        Tolerance for the defectiveness test on ``<psi_k, phi_k>_B``.

    Returns
    -------
    EigenData
        Sorted by descending real part, ties by descending imaginary part.
        ``psi`` columns have unit 2-norm and ``phi`` is scaled so that the
        B0 inner products are the identity.

    Raises
    ------
    NotSpdError, NoConvergenceError, DefectivePencilError
    """
    A0 = _as_matrix(A0, "A0")
    B0 = _as_matrix(B0, "B0")
    if A0.shape != B0.shape or A0.shape[0] != A0.shape[1]:
        raise ValueError("A0 and B0 must be square and of equal order")
    L = cholesky(B0)
    # C = L^-1 A0 L^-T
    C = sla.solve_triangular(L, A0, lower=True)
    C = sla.solve_triangular(L, C.T, lower=True).T
    try:
        w, vl, vr = sla.eig(C, left=True, right=True, check_finite=False)
    except sla.LinAlgError as exc:
        raise NoConvergenceError(str(exc)) from exc
    idx = _order_eigs(w)
    w, vl, vr = w[idx], vl[:, idx], vr[:, idx]

    n = w.shape[0]
    if n > 1:
        scale = max(1.0, np.abs(w).max())
        gaps = np.abs(w[:, None] - w[None, :])
        np.fill_diagonal(gaps, np.inf)
        if gaps.min() <= 1e2 * np.finfo(float).eps * scale:
            raise DefectivePencilError("repeated eigenvalue; pencil may be defective")

    phi = sla.solve_triangular(L.T, vr, lower=False).astype(complex)
    psi = sla.solve_triangular(L.T, vl, lower=False).astype(complex)
    psi /= np.linalg.norm(psi, axis=0)
    G = psi.conj().T @ B0 @ phi
    d = np.diag(G)
    nrm = np.linalg.norm(phi, axis=0) * np.linalg.norm(B0 @ psi, axis=0)
    if np.any(np.abs(d) <= tol * nrm):
        raise DefectivePencilError("eigenvector pairing <psi, phi>_B is numerically zero")
    phi = phi / d
    return EigenData(sigma=w, phi=phi, psi=psi)


def companion_roots(coeffs, balance=True, polish=True, maxit=None):
    """Roots of a polynomial from ascending coefficients.

    Uses shifted QR on the (balanced) Hessenberg companion matrix, followed
    by a couple of Newton steps on the original polynomial.

    Parameters
    ----------
    coeffs : sequence of complex
        ``c[0] + c[1] x + ... + c[n] x**n`` with ``c[n] != 0``.

    Returns
    -------
    ndarray of complex, length n

    Raises
    ------
    DegreeZeroError
        If the polynomial is constant after trimming zero leading terms.
    NoConvergenceError
    """
    c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    if not np.all(np.isfinite(c)):
        raise ValueError("polynomial coefficients must be finite")
    nz = np.nonzero(c)[0]
    if nz.size == 0 or nz[-1] == 0:
        raise DegreeZeroError("polynomial has degree zero")
    c = c[: nz[-1] + 1]
    n = c.size - 1
    # factor out roots at zero
    k0 = nz[0]
    c_red = c[k0:]
    m = c_red.size - 1
    roots = [0j] * k0
    if m > 0:
        C = np.zeros((m, m), dtype=complex)
        C[0, :] = -c_red[m - 1::-1] / c_red[m]
        if m > 1:
            C[np.arange(1, m), np.arange(0, m - 1)] = 1.0
        if balance:
            # LAPACK gebal, power-of-two scaling only; subnormal coefficients
            # can overflow the scaling, in which case balancing is skipped
            with np.errstate(all="ignore"):
                Cb = sla.matrix_balance(C, permute=False)[0]
            if np.all(np.isfinite(Cb)):
                C = Cb
        budget = maxit if maxit is not None else 60 * m
        ev, ok = _kernels.active.hqr_eigvals(np.ascontiguousarray(C), budget)
        if not ok:
            raise NoConvergenceError("companion QR exceeded iteration budget")
        if polish:
            desc = c_red[::-1]
            ddesc = np.polyder(desc)
            for i in range(m):
                x = ev[i]
                for _ in range(3):
                    dp = np.polyval(ddesc, x)
                    if dp == 0:
                        break
                    step = np.polyval(desc, x) / dp
                    if not np.isfinite(step) or abs(step) > 1e-3 * (1 + abs(x)):
                        break
                    x = x - step
                ev[i] = x
        roots.extend(ev.tolist())
    assert len(roots) == n
    return np.array(roots, dtype=complex)
