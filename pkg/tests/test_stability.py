import math
import warnings

import numpy as np
import pytest
from numpy.testing import assert_allclose

from paramstab.charfun import RankOneSystem, matrix_charfun
from paramstab.errors import (NearResonanceWarning, ResonantArgumentError, ResonantPoleError,
                              UnstableBaseError)
from paramstab.linalg import EigenData, eig_general
from paramstab.spectral import NoisePsd, PoleSet, gz_closed
from paramstab.stability import (ModePair, StabilityReport, chi_full, chi_matrix,
                                 chi_products_rank_one, critical_epsilon, ip_eigensum,
                                 ip_residues, lambda2, lambda2_bruteforce, select_mode_pair,
                                 stability_margin)


@pytest.fixture
def diag():
    sys = RankOneSystem(np.eye(2), np.diag([-1.0, -2.0]), [1.0, 0.0], [1.0, 0.0])
    return sys, matrix_charfun(sys), eig_general(sys.A0, sys.B0)


def _pairs(n):
    return [(p, q) for p in range(n) for q in range(p, n)]


def test_chi_trivial(diag):
    sys, _, eig = diag
    X = chi_full(eig, sys.A1)
    assert_allclose(X, [[1, 0], [0, 0]], atol=1e-15)
    assert chi_matrix(eig, np.zeros((2, 2)), 0, 1) == 0
    assert_allclose(chi_matrix(eig, sys.A1, 0, 0), 1.0)


def test_ip_diag_is_g0(diag, psd):
    sys, cf, eig = diag
    X = chi_full(eig, sys.A1)
    g0 = gz_closed(psd, 0.0)
    # an even PSD gives G(0) = 0 up to rounding
    assert abs(g0) < 1e-15
    assert abs(ip_eigensum(eig.sigma, X[0, :] * X[:, 0], psd, 0) - g0) < 1e-15
    ps = psd.poleset
    assert abs(np.sum(ps.residues / -ps.poles) - g0) < 1e-15
    assert abs(ip_residues(cf, psd, -1.0) - g0) < 1e-12


def test_zero_forcing_gives_zero(psd):
    eig = eig_general(np.diag([-1.0, -2.0, -3.0]), np.eye(3))
    A1 = np.zeros((3, 3))
    X = chi_full(eig, A1)
    assert ip_eigensum(eig.sigma, X[0, :] * X[:, 0], psd, 0) == 0
    pr = ModePair(0, 1, eig.sigma[0], eig.sigma[1])
    assert lambda2(eig, psd, pr, A1=A1) == 0
    assert lambda2_bruteforce(eig, A1, psd, pr) == 0


def test_lambda2_diag_same_mode(diag, psd, kernel_backend):
    sys, cf, eig = diag
    pr = ModePair(0, 0, -1.0, -1.0)
    g0 = gz_closed(psd, 0.0)
    assert abs(lambda2(eig, psd, pr, A1=sys.A1) - 4 * g0) < 1e-14
    assert abs(lambda2_bruteforce(eig, sys.A1, psd, pr) - 4 * g0) < 1e-14
    assert abs(lambda2(cf, psd, pr) - 4 * g0) < 1e-12


def test_pendulum_paths_agree(pendulum, psd, kernel_backend):
    _, sys, cf = pendulum
    eig = eig_general(sys.A0, sys.B0)
    X = chi_full(eig, sys.A1)
    for p in range(4):
        a = ip_eigensum(eig.sigma, X[p, :] * X[:, p], psd, p)
        b = ip_residues(cf, psd, eig.sigma[p])
        assert abs(a - b) <= 1e-12 * abs(b)
    for p, q in _pairs(4):
        pr = ModePair(p, q, eig.sigma[p], eig.sigma[q])
        ref = lambda2_bruteforce(eig, sys.A1, psd, pr)
        assert abs(lambda2(cf, psd, pr) - ref) <= 1e-10 * abs(ref)
        assert abs(lambda2(eig, psd, pr, A1=sys.A1) - ref) <= 1e-10 * abs(ref)


def test_matrix_charfun_residue_path(pendulum, psd):
    _, sys, cf = pendulum
    mcf = matrix_charfun(sys)
    for s in cf.eigenvalues():
        a, b = ip_residues(mcf, psd, s), ip_residues(cf, psd, s)
        assert abs(a - b) <= 1e-12 * abs(b)


def test_rank_one_chi_identities(pendulum):
    _, sys, cf = pendulum
    eig = eig_general(sys.A0, sys.B0)
    X = chi_full(eig, sys.A1)
    dfa = np.array([cf.derivative(s) for s in eig.sigma])
    for p in range(4):
        assert_allclose(X[p, :] * X[:, p], chi_products_rank_one(dfa, p), rtol=1e-10)
        assert_allclose(X[p, p], -1 / dfa[p], rtol=1e-10)


def test_lambda2_swap_symmetry(pendulum, psd):
    # relabelling the modes so p and q trade places leaves lambda2 unchanged
    _, sys, cf = pendulum
    eig = eig_general(sys.A0, sys.B0)
    perm = [2, 1, 0, 3]
    eig2 = EigenData(eig.sigma[perm], eig.phi[:, perm], eig.psi[:, perm])
    a = lambda2(eig, psd, ModePair(0, 2, eig.sigma[0], eig.sigma[2]), A1=sys.A1)
    b = lambda2(eig2, psd, ModePair(0, 2, eig2.sigma[0], eig2.sigma[2]), A1=sys.A1)
    assert_allclose(a, b, rtol=1e-13)


def test_conjugate_pair_lambda2_is_real(pendulum, psd):
    _, sys, cf = pendulum
    eig = eig_general(sys.A0, sys.B0)
    for p, q in ((0, 1), (2, 3)):
        assert abs(eig.sigma[p] - np.conj(eig.sigma[q])) < 1e-12
        l2 = lambda2(cf, psd, ModePair(p, q, eig.sigma[p], eig.sigma[q]))
        assert abs(l2.imag) <= 1e-10 * abs(l2)


def test_select_pair_pendulum(pendulum, psd):
    _, sys, cf = pendulum
    sig = cf.eigenvalues()
    ev = lambda pr: lambda2(cf, psd, pr)
    rep = select_mode_pair(sig, ev)
    # oracle: enumerate every pair
    best = min(_pairs(4), key=lambda pq: critical_epsilon(
        sig[pq[0]] + sig[pq[1]], ev(ModePair(pq[0], pq[1], sig[pq[0]], sig[pq[1]]))))
    assert (rep.pair.p, rep.pair.q) == best
    assert abs(rep.pair.sigma_p - np.conj(rep.pair.sigma_q)) < 1e-12
    assert math.isfinite(rep.epsilon_crit)


def test_select_pair_without_forcing():
    sig = np.array([-1 + 2j, -1 - 2j, -3.0])
    rep = select_mode_pair(sig, lambda pr: 0j)
    assert math.isinf(rep.epsilon_crit)
    assert (rep.pair.p, rep.pair.q) == (0, 0)
    assert rep.diagnostics


def test_select_pair_unstable_base():
    with pytest.raises(UnstableBaseError):
        select_mode_pair(np.array([-1.0, 0.1]), lambda pr: 0j)


def test_stability_margin_and_critical_eps():
    lam0, lam2 = -0.8 + 0j, 2e-8 + 1e-9j
    assert stability_margin(lam0, lam2, 0.0).stable
    ec = critical_epsilon(lam0, lam2)
    assert abs(stability_margin(lam0, lam2, ec).lam.real) <= 1e-12
    m = stability_margin(lam0, lam2, 2 * ec)
    assert not m.stable
    assert_allclose(m.lam.real, 3 * 0.8, rtol=1e-12)
    assert math.isinf(critical_epsilon(lam0, -1e-3))


def test_report_fields(pendulum, psd):
    _, _, cf = pendulum
    sig = cf.eigenvalues()
    pr = ModePair(0, 1, sig[0], sig[1])
    rep = StabilityReport(pr, lambda2(cf, psd, pr), "residues", epsilon=0.0)
    assert rep.lam == rep.lambda0 and rep.stable
    d = rep.as_dict()
    assert d["p"] == 0 and d["stable"] is True


def test_resonant_argument():
    sig = np.array([-1.0 + 0j, -2.0 + 0j])
    ps = PoleSet(np.array([1.0 + 0j]), np.array([1.0 + 0j]))  # pole at sigma_0 - sigma_1
    with pytest.raises(ResonantArgumentError):
        ip_eigensum(sig, np.ones(2), ps, 0)
    ps = PoleSet(np.array([1.0 + 1e-7j]), np.array([1.0 + 0j]))
    with pytest.warns(NearResonanceWarning):
        ip_eigensum(sig, np.ones(2), ps, 0)


def test_resonant_pole():
    sys = RankOneSystem(np.eye(2), np.diag([-1.0, -2.0]), [1.0, 1.0], [1.0, 1.0])
    cf = matrix_charfun(sys)
    # sigma_p - mu hits the other eigenvalue
    ps = PoleSet(np.array([1.0 + 0j]), np.array([0.1 + 0j]))
    with pytest.raises(ResonantPoleError):
        ip_residues(cf, ps, -1.0)
    ps = PoleSet(np.array([1.0 + 3e-7j]), np.array([0.1 + 0j]))
    with pytest.warns(NearResonanceWarning):
        ip_residues(cf, ps, -1.0)
    ps = PoleSet(np.array([0.5 + 0.5j]), np.array([0.1 + 0j]))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ip_residues(cf, ps, -1.0)


@pytest.mark.parametrize("seed", range(3))
def test_random_matrix_systems(seed, kernel_backend):
    # general SPD mass, random stable A0, random rank-one forcing
    rng = np.random.default_rng(100 + seed)
    n = 8
    X = rng.standard_normal((n, n))
    B0 = X @ X.T + n * np.eye(n)
    # spectrum spread over a decade, half of it in conjugate pairs
    lam = -np.linspace(1.0, 10.0, n) + 0j
    lam[:4] = lam[:4] + 1j * np.array([3.0, -3.0, 5.0, -5.0])
    lam[1], lam[3] = lam[0].conjugate(), lam[2].conjugate()
    S = rng.standard_normal((n, n)) + 3 * np.eye(n)
    D = np.diag(lam.real)
    for k in (0, 2):
        D[k:k + 2, k:k + 2] = [[lam[k].real, lam[k].imag], [-lam[k].imag, lam[k].real]]
    A0 = B0 @ S @ D @ np.linalg.inv(S)
    sys = RankOneSystem(B0, A0, rng.standard_normal(n), rng.standard_normal(n))
    cf = matrix_charfun(sys)
    eig = eig_general(sys.A0, sys.B0)
    assert np.all(eig.sigma.real < 0)
    psd = NoisePsd(1.0, 3.0)
    Xc = chi_full(eig, sys.A1)
    for p in range(n):
        a = ip_eigensum(eig.sigma, Xc[p, :] * Xc[:, p], psd, p)
        b = ip_residues(cf, psd, eig.sigma[p])
        assert abs(a - b) <= 1e-9 * abs(b)
    for p, q in [(0, 0), (0, 1), (2, 5), (n - 1, n - 1)]:
        pr = ModePair(p, q, eig.sigma[p], eig.sigma[q])
        ref = lambda2_bruteforce(eig, sys.A1, psd, pr)
        assert abs(lambda2(eig, psd, pr, A1=sys.A1) - ref) <= 1e-10 * abs(ref)
        assert abs(lambda2(cf, psd, pr) - ref) <= 1e-8 * abs(ref)
