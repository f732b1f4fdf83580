"""Second-moment growth rate ``lambda = lambda0 + eps^2 lambda2``.

For a mode pair ``(p, q)`` the unforced rate is ``lambda0 = sigma_p + sigma_q``
and the correction is

    lambda2 = [4 X_pp X_qq G(0) + 2 X_pq X_qp (G(s_p - s_q) + G(s_q - s_p))
               + 2 (I_p + I_q + 2 d_pq I_p)] / (2 (1 + d_pq))

with ``X_ij = <psi_i, A1 phi_j>`` and ``I_p = sum_k X_pk X_kp G(s_p - s_k)``.
``I_p`` can be summed over eigenvalues, or, when ``A1`` has rank one,
evaluated exactly from the finitely many poles of ``G``:

    I_p = (1 / f_A'(s_p)) sum_m r_m / f_A(s_p - mu_m).
"""
import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import _kernels
from .charfun import CharacteristicFunction, check_simple_zero
from .errors import (NearEigenvalueError, NearResonanceWarning, ResonantArgumentError, ResonantPoleError,
                     UnstableBaseError)
from .linalg import EigenData
from .spectral import NoisePsd, PoleSet, rational_eval

WARN_RTOL = 1e-6
ERROR_RTOL = 1e-10
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class ModePair:
    p: int
    q: int
    sigma_p: complex
    sigma_q: complex
    lambda0: complex = field(init=False)

    def __post_init__(self):
        if self.p > self.q:
            raise ValueError("mode pair must have p <= q")
        object.__setattr__(self, "sigma_p", complex(self.sigma_p))
        object.__setattr__(self, "sigma_q", complex(self.sigma_q))
        object.__setattr__(self, "lambda0", self.sigma_p + self.sigma_q)

    @property
    def diagonal(self):
        return self.p == self.q


def critical_epsilon(lambda0, lambda2):
    """Smallest ``eps`` with ``Re(lambda0 + eps^2 lambda2) >= 0``; inf if none."""
    r2 = complex(lambda2).real
    if r2 <= 0:
        return math.inf
    return math.sqrt(max(-complex(lambda0).real, 0.0) / r2)


@dataclass(frozen=True)
class Margin:
    lam: complex
    stable: bool


def stability_margin(lambda0, lambda2, epsilon):
    """``lambda = lambda0 + eps^2 lambda2`` and whether ``Re lambda < 0``."""
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    lam = complex(lambda0) + epsilon ** 2 * complex(lambda2)
    return Margin(lam=lam, stable=lam.real < 0)


@dataclass
class StabilityReport:
    pair: ModePair
    lambda2: complex
    method: str
    epsilon: Optional[float] = None
    diagnostics: List[str] = field(default_factory=list)

    @property
    def lambda0(self):
        return self.pair.lambda0

    @property
    def epsilon_crit(self):
        return critical_epsilon(self.lambda0, self.lambda2)

    @property
    def lam(self):
        if self.epsilon is None:
            return None
        return stability_margin(self.lambda0, self.lambda2, self.epsilon).lam

    @property
    def stable(self):
        eps = 0.0 if self.epsilon is None else self.epsilon
        return stability_margin(self.lambda0, self.lambda2, eps).stable

    def as_dict(self):
        def c(z):
            return None if z is None else [z.real, z.imag]
        return {
            "p": self.pair.p, "q": self.pair.q,
            "sigma_p": c(self.pair.sigma_p), "sigma_q": c(self.pair.sigma_q),
            "lambda0": c(self.lambda0), "lambda2": c(self.lambda2),
            "epsilon": self.epsilon, "lambda": c(self.lam),
            "epsilon_crit": self.epsilon_crit, "stable": self.stable,
            "method": self.method, "diagnostics": list(self.diagnostics),
        }


# ---- helpers ---------------------------------------------------------------

def _poleset(G):
    if isinstance(G, NoisePsd):
        return G.poleset
    if isinstance(G, PoleSet):
        return G
    return None


def _g_eval(G, z):
    ps = _poleset(G)
    if ps is not None:
        return rational_eval(ps, z)
    return G(z)


def _freq_scale(ps):
    return max(1.0, float(np.abs(ps.poles).max()))


def _check_arguments(ps, z, what="G"):
    """Warn or raise when an argument of G sits near one of its poles."""
    if ps is None:
        return
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    d = np.abs(z[:, None] - ps.poles[None, :]).min()
    fs = _freq_scale(ps)
    if d <= ERROR_RTOL * fs:
        raise ResonantArgumentError(f"{what} argument within {d:.2e} of a pole")
    if d <= WARN_RTOL * fs:
        warnings.warn(f"{what} argument within {d:.2e} of a pole", NearResonanceWarning)


# ---- interaction coefficients ---------------------------------------------

def chi_full(eig, A1):
    """Matrix of ``chi_ij = psi_i^H A1 phi_j``."""
    return eig.psi.conj().T @ np.asarray(A1) @ eig.phi


def chi_matrix(eig, A1, i, j):
    """Single coefficient ``chi_ij = psi_i^H A1 phi_j``."""
    return complex(eig.psi[:, i].conj() @ np.asarray(A1) @ eig.phi[:, j])


def chi_products_rank_one(dfa, p):
    """``chi_pk chi_kp = 1 / (f_A'(s_k) f_A'(s_p))`` for every ``k``."""
    dfa = np.asarray(dfa, dtype=complex)
    return 1.0 / (dfa * dfa[p])


# ---- I_p -------------------------------------------------------------------

def eigensum_terms(sigmas, chi_products, G, p):
    """Individual terms ``chi_pk chi_kp G(s_p - s_k)`` in the given order."""
    sigmas = np.asarray(sigmas, dtype=complex)
    z = sigmas[p] - sigmas
    _check_arguments(_poleset(G), z)
    return np.asarray(chi_products, dtype=complex) * _g_eval(G, z)


def ip_eigensum(sigmas, chi_products, G, p, N=None):
    """``I_p`` truncated to the first ``N`` eigenvalues.

    Parameters
    ----------
    sigmas : array_like
        Eigenvalues in the order in which they are to be summed. Matrix
        eigenvalues from :func:`eig_general` come by descending real part.
    chi_products : array_like
        ``chi_pk chi_kp`` aligned with ``sigmas``.
    G : NoisePsd, PoleSet or callable
    p : int
        Index of ``sigma_p`` in ``sigmas``.
    N : int, optional
        Truncation; all terms by default.
    """
    sigmas = np.asarray(sigmas, dtype=complex)
    n = sigmas.shape[0] if N is None else int(N)
    if n > sigmas.shape[0] or n < 1:
        raise ValueError(f"truncation {n} outside 1..{sigmas.shape[0]}")
    terms = eigensum_terms(sigmas[:n], np.asarray(chi_products)[:n], G, p)
    return complex(np.sum(terms))


def ip_residues(cf, G, sigma_p, dfp=None):
    """``I_p`` as a finite sum over the poles of ``G`` (rank-one forcing).

    Raises
    ------
    DegenerateModeError
        If ``f_A'(sigma_p)`` vanishes.
    ResonantPoleError
        If some ``sigma_p - mu_m`` is numerically a zero of ``f_A``.
    """
    ps = _poleset(G)
    if ps is None:
        raise TypeError("residue path needs a NoisePsd or PoleSet")
    sigma_p = complex(sigma_p)
    dfp = check_simple_zero(cf, sigma_p, dfp)
    args = sigma_p - ps.poles
    fv = np.empty(args.shape, dtype=complex)
    dv = np.empty(args.shape, dtype=complex)
    for i, z in enumerate(args):
        try:
            fv[i], dv[i] = cf.fdf(z)
        except NearEigenvalueError as exc:
            raise ResonantPoleError("sigma_p - mu_m coincides with an eigenvalue") from exc
    # Newton distance from each argument to the nearest zero of f_A
    dist = np.abs(fv) / np.maximum(np.abs(dv), np.finfo(float).tiny)
    fs = _freq_scale(ps)
    if np.any(dist <= ERROR_RTOL * fs):
        raise ResonantPoleError("sigma_p - mu_m coincides with an eigenvalue")
    if np.any(dist <= WARN_RTOL * fs):
        warnings.warn("sigma_p - mu_m is close to an eigenvalue; I_p is amplified",
                      NearResonanceWarning)
    return complex(np.sum(ps.residues / fv) / dfp)


# ---- lambda2 ---------------------------------------------------------------

def _combine(Xd, Xo, G0, Gpq, Gqp, Ip, Iq, same):
    d = 1.0 if same else 0.0
    return (4 * Xd * G0 + 2 * Xo * (Gpq + Gqp) + 2 * (Ip + Iq + 2 * d * Ip)) / (2 * (1 + d))


def lambda2(source, G, pair, A1=None, method=None, N=None):
    """Second-order growth-rate correction for ``pair``.

    Parameters
    ----------
    source : CharacteristicFunction or EigenData
        A characteristic function gives the rank-one route; eigen data
        (with ``A1``) gives the route through the full ``chi`` matrix.
    G : NoisePsd
    pair : ModePair
    A1 : array_like, optional
        Forcing matrix, needed with eigen data.
    method : {"residues", "eigensum"}, optional
        For a characteristic function, ``eigensum`` sums ``I_p`` over the
        first ``N`` enumerated eigenvalues instead of the poles of ``G``.
    """
    p, q = pair.p, pair.q
    sp, sq = pair.sigma_p, pair.sigma_q
    same = p == q
    for z in (0.0, sp - sq, sq - sp):
        _check_arguments(_poleset(G), z)
    G0 = _g_eval(G, 0.0)
    Gpq = _g_eval(G, sp - sq)
    Gqp = _g_eval(G, sq - sp)

    if isinstance(source, EigenData):
        if A1 is None:
            raise ValueError("eigen-data route needs A1")
        X = chi_full(source, A1)
        sig = source.sigma
        n = sig.shape[0] if N is None else N
        Ip = ip_eigensum(sig, X[p, :] * X[:, p], G, p, n)
        Iq = Ip if same else ip_eigensum(sig, X[q, :] * X[:, q], G, q, n)
        return complex(_combine(X[p, p] * X[q, q], X[p, q] * X[q, p],
                                G0, Gpq, Gqp, Ip, Iq, same))

    if not isinstance(source, CharacteristicFunction):
        raise TypeError("source must be a CharacteristicFunction or EigenData")
    cf = source
    method = method or "residues"
    fp = check_simple_zero(cf, sp)
    fq = fp if same else check_simple_zero(cf, sq)
    X = 1.0 / (fp * fq)
    if method == "residues":
        Ip = ip_residues(cf, G, sp, fp)
        Iq = Ip if same else ip_residues(cf, G, sq, fq)
    elif method == "eigensum":
        sig = cf.eigenvalues(N)
        dfa = np.array([complex(cf.derivative(s)) for s in sig])
        Ip = ip_eigensum(sig, chi_products_rank_one(dfa, p), G, p)
        Iq = Ip if same else ip_eigensum(sig, chi_products_rank_one(dfa, q), G, q)
    else:
        raise ValueError(f"unknown method {method!r}")
    return complex(_combine(X, X, G0, Gpq, Gqp, Ip, Iq, same))


def lambda2_bruteforce(eig, A1, G, pair):
    """Literal double sum ``8 sum_jk C_jkpq C_pqjk G(s_p + s_q - s_j - s_k) / (1 + d_pq)``."""
    ps = _poleset(G)
    if ps is None:
        raise TypeError("brute-force sum needs a NoisePsd or PoleSet")
    X = np.ascontiguousarray(chi_full(eig, A1))
    sig = np.ascontiguousarray(eig.sigma)
    p, q = pair.p, pair.q
    z = (sig[p] + sig[q] - sig[:, None] - sig[None, :]).ravel()
    _check_arguments(ps, z)
    return complex(_kernels.active.lambda2_double(
        X, sig, p, q, np.ascontiguousarray(ps.poles), np.ascontiguousarray(ps.residues)))


# ---- pair selection --------------------------------------------------------

def select_mode_pair(sigmas, lambda2_evaluator, top_k=8, epsilon=None,
                     order="real", method="residues"):
    """Pick the mode pair with the smallest critical forcing amplitude.

    Parameters
    ----------
    sigmas : array_like
        Unforced eigenvalues; all must have negative real part.
    lambda2_evaluator : callable
        ``lambda2_evaluator(pair) -> complex``.
    top_k : int
        Pairs are formed among the first ``top_k`` candidates.
    order : {"real", "given"}
        Candidates by descending real part, or in the order supplied.
    epsilon : float, optional
        Forcing amplitude recorded in the report.

    Ties in the critical amplitude (including all infinite) go to the pair
    with the least negative ``Re lambda0``, then to the lexicographically
    smallest indices.
    """
    sig = np.asarray(sigmas, dtype=complex)
    if np.any(sig.real >= 0):
        raise UnstableBaseError("unforced system has an eigenvalue with Re >= 0")
    if order == "real":
        cand = np.argsort(-sig.real, kind="stable")[:top_k]
    elif order == "given":
        cand = np.arange(min(top_k, sig.shape[0]))
    else:
        raise ValueError(f"unknown order {order!r}")
    cand = sorted(int(c) for c in cand)
    rows = []
    for a_i, p in enumerate(cand):
        for q in cand[a_i:]:
            pair = ModePair(p, q, sig[p], sig[q])
            l2 = complex(lambda2_evaluator(pair))
            rows.append((critical_epsilon(pair.lambda0, l2), pair, l2))
    best = min(r[0] for r in rows)

    def tied(e):
        if math.isinf(best):
            return math.isinf(e)
        return e <= best * (1 + TIE_RTOL)

    eps_c, pair, l2 = min((r for r in rows if tied(r[0])),
                          key=lambda r: (abs(r[1].lambda0.real), r[1].p, r[1].q))
    diags = []
    if pair.p != pair.q and abs(pair.sigma_p - pair.sigma_q) <= 1e-8 * (1 + abs(pair.sigma_p)):
        diags.append("distinct modes with numerically equal eigenvalues; treated as p != q")
    if math.isinf(eps_c):
        diags.append("no destabilisation at second order for any epsilon")
    return StabilityReport(pair=pair, lambda2=l2, method=method, epsilon=epsilon,
                           diagnostics=diags)
