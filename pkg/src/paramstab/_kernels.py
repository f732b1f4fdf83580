"""Hot loops, with a numba path and a pure-numpy path.

Set ``PARAMSTAB_USE_NUMBA=0`` to force the numpy path. If numba cannot be
imported the numpy path is used regardless. Both paths are always importable
as ``NUMPY`` and ``NUMBA`` (the latter is ``None`` without numba) so tests and
the benchmark can compare them directly.
"""
import os
from types import SimpleNamespace

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

_EPS = np.finfo(float).eps


def _flag_enabled():
    val = os.environ.get("PARAMSTAB_USE_NUMBA", "").strip().lower()
    return val not in ("0", "false", "no", "off")


def _hqr_eigvals(H, maxit):
    # Complex single-shift QR on an upper Hessenberg matrix, eigenvalues only.
    # Returns (eigenvalues, converged flag). Written with plain loops and
    # slices so the same source runs under numba or CPython.
    H = H.copy()
    n = H.shape[0]
    eig = np.zeros(n, dtype=np.complex128)
    cs = np.zeros(n, dtype=np.complex128)
    sn = np.zeros(n, dtype=np.complex128)
    hi = n - 1
    its = 0
    total = 0
    while hi >= 0:
        if hi == 0:
            eig[0] = H[0, 0]
            break
        l = hi
        while l > 0:
            off = abs(H[l, l - 1])
            diag = abs(H[l, l]) + abs(H[l - 1, l - 1])
            if diag == 0.0:
                diag = 1.0
            if off <= _EPS * diag:
                H[l, l - 1] = 0.0
                break
            l -= 1
        if l == hi:
            eig[hi] = H[hi, hi]
            hi -= 1
            its = 0
            continue
        its += 1
        total += 1
        if total > maxit:
            return eig, False
        a = H[hi - 1, hi - 1]
        b = H[hi - 1, hi]
        c = H[hi, hi - 1]
        d = H[hi, hi]
        if its % 11 == 0:
            # exceptional shift to break cycles
            mu = d + 0.75 * abs(c)
        else:
            half = 0.5 * (a + d)
            disc = np.sqrt(0.25 * (a - d) * (a - d) + b * c)
            m1 = half + disc
            m2 = half - disc
            mu = m1 if abs(m1 - d) < abs(m2 - d) else m2
        for k in range(l, hi + 1):
            H[k, k] -= mu
        for k in range(l, hi):
            x = H[k, k]
            y = H[k + 1, k]
            r = np.sqrt(abs(x) ** 2 + abs(y) ** 2)
            if r == 0.0:
                cs[k] = 1.0
                sn[k] = 0.0
                continue
            c_ = x / r
            s_ = y / r
            cs[k] = c_
            sn[k] = s_
            for j in range(k, hi + 1):
                t0 = H[k, j]
                t1 = H[k + 1, j]
                H[k, j] = np.conj(c_) * t0 + np.conj(s_) * t1
                H[k + 1, j] = -s_ * t0 + c_ * t1
        for k in range(l, hi):
            c_ = cs[k]
            s_ = sn[k]
            top = min(k + 2, hi)
            for i in range(l, top + 1):
                t0 = H[i, k]
                t1 = H[i, k + 1]
                H[i, k] = c_ * t0 + s_ * t1
                H[i, k + 1] = -np.conj(s_) * t0 + np.conj(c_) * t1
        for k in range(l, hi + 1):
            H[k, k] += mu
    return eig, True


# ---- rational sum  sum_m r_m / (z - mu_m) -------------------------------

def _rational_sum_loop(z, poles, residues):
    out = np.zeros(z.shape[0], dtype=np.complex128)
    for i in range(z.shape[0]):
        acc = 0.0 + 0.0j
        for m in range(poles.shape[0]):
            acc += residues[m] / (z[i] - poles[m])
        out[i] = acc
    return out


def _rational_sum_np(z, poles, residues):
    return (residues[None, :] / (z[:, None] - poles[None, :])).sum(axis=1)


# ---- deflation correction  sum_j 1/(s - r_j) ---------------------------

def _deflation_sum_loop(s, roots):
    acc = 0.0 + 0.0j
    for j in range(roots.shape[0]):
        acc += 1.0 / (s - roots[j])
    return acc


def _deflation_sum_np(s, roots):
    if roots.size == 0:
        return 0.0 + 0.0j
    return complex(np.sum(1.0 / (s - roots)))


# ---- brute-force lambda_2 double sum -----------------------------------
# C_jkpq C_pqjk with C_jklm = (d_jm X_kl + d_km X_jl + d_jl X_km + d_kl X_jm)/4

def _lambda2_double_loop(chi, sigma, p, q, poles, residues):
    n = sigma.shape[0]
    dpq = 1.0 if p == q else 0.0
    acc = 0.0 + 0.0j
    sp = sigma[p] + sigma[q]
    for j in range(n):
        for k in range(n):
            c1 = 0.0 + 0.0j
            c2 = 0.0 + 0.0j
            # C_{jkpq}
            if j == q:
                c1 += chi[k, p]
            if k == q:
                c1 += chi[j, p]
            if j == p:
                c1 += chi[k, q]
            if k == p:
                c1 += chi[j, q]
            # C_{pqjk}
            if p == k:
                c2 += chi[q, j]
            if q == k:
                c2 += chi[p, j]
            if p == j:
                c2 += chi[q, k]
            if q == j:
                c2 += chi[p, k]
            if c1 == 0.0 or c2 == 0.0:
                continue
            zz = sp - sigma[j] - sigma[k]
            g = 0.0 + 0.0j
            for m in range(poles.shape[0]):
                g += residues[m] / (zz - poles[m])
            acc += c1 * c2 * g
    return 8.0 * acc / 16.0 / (1.0 + dpq)


def _lambda2_double_np(chi, sigma, p, q, poles, residues):
    n = sigma.shape[0]
    dpq = 1.0 if p == q else 0.0
    I = np.eye(n)
    # C1[j,k] = C_{jkpq}, C2[j,k] = C_{pqjk}
    C1 = (I[:, q][:, None] * chi[None, :, p] + I[:, q][None, :] * chi[:, p][:, None]
          + I[:, p][:, None] * chi[None, :, q] + I[:, p][None, :] * chi[:, q][:, None])
    C2 = (I[:, p][None, :] * chi[q, :][:, None] + I[:, q][None, :] * chi[p, :][:, None]
          + I[:, p][:, None] * chi[q, :][None, :] + I[:, q][:, None] * chi[p, :][None, :])
    w = C1 * C2
    jj, kk = np.nonzero(w)
    if jj.size == 0:
        return 0.0 + 0.0j
    zz = sigma[p] + sigma[q] - sigma[jj] - sigma[kk]
    g = _rational_sum_np(zz, poles, residues)
    return complex(8.0 * np.sum(w[jj, kk] * g) / 16.0 / (1.0 + dpq))


NUMPY = SimpleNamespace(
    name="numpy",
    hqr_eigvals=_hqr_eigvals,
    rational_sum=_rational_sum_np,
    deflation_sum=_deflation_sum_np,
    lambda2_double=_lambda2_double_np,
)

if numba is not None:
    _jit = numba.njit(cache=True)
    NUMBA = SimpleNamespace(
        name="numba",
        hqr_eigvals=_jit(_hqr_eigvals),
        rational_sum=_jit(_rational_sum_loop),
        deflation_sum=_jit(_deflation_sum_loop),
        lambda2_double=_jit(_lambda2_double_loop),
    )
else:  # pragma: no cover
    NUMBA = None

USE_NUMBA = NUMBA is not None and _flag_enabled()
active = NUMBA if USE_NUMBA else NUMPY


def backend(name=None):
    """Return the kernel namespace called ``name`` (or the active one)."""
    if name is None:
        return active
    if name == "numba":
        if NUMBA is None:
            raise RuntimeError("numba is not installed")
        return NUMBA
    if name == "numpy":
        return NUMPY
    raise ValueError(f"unknown backend {name!r}")
