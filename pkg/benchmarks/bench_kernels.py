"""Time the numba kernels against their numpy counterparts.

    python3 benchmarks/bench_kernels.py --repeat 20

The first numba call includes compilation (or cache load) and is reported
separately.
"""
import argparse
import time

import numpy as np

from paramstab import _kernels
from paramstab.linalg import eig_general
from paramstab.models.faraday import FaradayParams, faraday_charfun
from paramstab.spectral import NoisePsd
from paramstab.stability import chi_full


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    ps = NoisePsd(20.0, 100.0).poleset
    z = rng.standard_normal(200_000) + 1j * rng.standard_normal(200_000)
    roots = faraday_charfun(FaradayParams(depth=1.0)).eigenvalues(400)
    n = 60
    H = np.triu(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)), -1)
    m = 120
    X = rng.standard_normal((m, m))
    eig = eig_general(rng.standard_normal((m, m)), X @ X.T + m * np.eye(m))
    chi = np.ascontiguousarray(chi_full(eig, np.outer(rng.standard_normal(m),
                                                       rng.standard_normal(m))))
    return [
        ("rational_sum  (2e5 points)", lambda k: k.rational_sum(z, ps.poles, ps.residues)),
        ("deflation_sum (400 roots x 2000)",
         lambda k: [k.deflation_sum(0.3 + 1j * i, roots) for i in range(2000)]),
        ("hqr_eigvals   (60x60 Hessenberg)", lambda k: k.hqr_eigvals(H.copy(), 60 * n)),
        ("lambda2_double (n=120)",
         lambda k: k.lambda2_double(chi, eig.sigma, 3, 7, ps.poles, ps.residues)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if _kernels.NUMBA is None:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<34}{'numpy':>12}{'numba':>12}{'speedup':>10}{'first call':>12}")
    for name, call in cases(rng):
        t0 = time.perf_counter()
        call(_kernels.NUMBA)
        first = time.perf_counter() - t0
        t_np = best_of(lambda: call(_kernels.NUMPY), args.repeat)
        t_nb = best_of(lambda: call(_kernels.NUMBA), args.repeat)
        print(f"{name:<34}{t_np * 1e3:>10.2f}ms{t_nb * 1e3:>10.2f}ms"
              f"{t_np / t_nb:>9.1f}x{first * 1e3:>10.1f}ms")


if __name__ == "__main__":
    main()
