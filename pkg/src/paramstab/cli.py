"""Command-line front end.

Exit codes: 0 stable (or all checks passed), 1 unstable (or a check failed),
2 configuration or numerical error.
"""
import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import fields

import numpy as np

from . import tables
from .charfun import RankOneSystem, matrix_charfun
from .errors import ConfigError, ParamStabError
from .linalg import eig_general
from .models.faraday import FaradayParams, faraday_charfun
from .models.kkt import KktSystem, kkt_reduce
from .models.pendulum import PendulumParams, pendulum_charfun, pendulum_system
from .spectral import NoisePsd, poles_residues, psd_eval, psd_integral, gz_closed
from .stability import (ModePair, chi_full, chi_products_rank_one, ip_eigensum,
                        ip_residues, lambda2, select_mode_pair)

FMT = "%.16e"
MODELS = ("pendulum", "faraday", "matrix", "kkt")
FARADAY_REQUIRED = ("rho", "nu", "T", "g0", "alpha")


def n_threads():
    val = os.environ.get("PARAMSTAB_THREADS")
    if val:
        try:
            return max(1, int(val))
        except ValueError:
            raise ConfigError("PARAMSTAB_THREADS must be an integer", "PARAMSTAB_THREADS")
    return os.cpu_count() or 1


# ---- configuration ----------------------------------------------------------

def load_config(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}", "config")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}", "config")
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object", "config")
    return cfg


def _num(d, key, where, required=True, default=None):
    if key not in d or d[key] is None:
        if required:
            raise ConfigError(f"missing field '{key}' in {where}", key)
        return default
    try:
        return float(d[key])
    except (TypeError, ValueError):
        raise ConfigError(f"field '{key}' in {where} must be a number", key)


def _matrix_source(params, keys, where):
    if "file" in params:
        src = load_config(params["file"])
    else:
        src = params
    out = {}
    for k in keys:
        if k not in src:
            raise ConfigError(f"missing field '{k}' in {where}", k)
        try:
            out[k] = np.asarray(src[k], dtype=float)
        except (TypeError, ValueError):
            raise ConfigError(f"field '{k}' in {where} must be a numeric array", k)
    return out


def build_psd(cfg):
    psd = cfg.get("psd", {})
    if not isinstance(psd, dict):
        raise ConfigError("psd must be an object with 'a' and 'omega0'", "psd")
    a = _num(psd, "a", "psd", False, tables.PSD_CALIBRATED[0])
    w0 = _num(psd, "omega0", "psd", False, tables.PSD_CALIBRATED[1])
    try:
        return NoisePsd(a, w0)
    except ValueError as exc:
        raise ConfigError(str(exc), "psd")


def faraday_params(cfg):
    params = cfg.get("params", {})
    vals = {k: _num(params, k, "params") for k in FARADAY_REQUIRED}
    depth = params.get("depth")
    if depth is not None:
        depth = _num(params, "depth", "params")
    try:
        return FaradayParams(depth=depth, **vals)
    except ValueError as exc:
        raise ConfigError(str(exc), "params")


class Problem:
    """Everything the analysis needs for one configured model."""

    def __init__(self, cfg):
        model = cfg.get("model")
        if model not in MODELS:
            raise ConfigError(f"field 'model' must be one of {', '.join(MODELS)}", "model")
        self.model = model
        self.psd = build_psd(cfg)
        self.eig = None
        self.A1 = None
        self.order = "real"
        params = cfg.get("params", {})
        if not isinstance(params, dict):
            raise ConfigError("params must be an object", "params")
        if model == "pendulum":
            names = [f.name for f in fields(PendulumParams)]
            unknown = set(params) - set(names)
            if unknown:
                raise ConfigError(f"unknown pendulum field '{sorted(unknown)[0]}'",
                                  sorted(unknown)[0])
            kw = {k: _num(params, k, "params") for k in params}
            try:
                p = PendulumParams(**kw)
            except ValueError as exc:
                raise ConfigError(str(exc), "params")
            self.cf = pendulum_charfun(p)
            self._matrix(pendulum_system(p))
        elif model == "faraday":
            self.params = faraday_params(cfg)
            self.cf = faraday_charfun(self.params)
            self.order = "given"
        elif model == "matrix":
            m = _matrix_source(params, ("B0", "A0", "u", "v"), "params")
            self._matrix(self._system(m["B0"], m["A0"], m["u"], m["v"]))
        else:
            m = _matrix_source(params, ("M0", "K0", "C", "a", "b"), "params")
            try:
                sys_, _ = kkt_reduce(KktSystem(m["M0"], m["K0"], m["C"], m["a"], m["b"]))
            except ValueError as exc:
                raise ConfigError(str(exc), "params")
            self._matrix(sys_)

    @staticmethod
    def _system(B0, A0, u, v):
        try:
            return RankOneSystem(B0, A0, u, v)
        except ValueError as exc:
            raise ConfigError(str(exc), "params")

    def _matrix(self, sys_):
        self.system = sys_
        if not hasattr(self, "cf"):
            self.cf = matrix_charfun(sys_)
        self.eig = eig_general(sys_.A0, sys_.B0)
        self.A1 = sys_.A1

    def sigmas(self, n=None):
        if self.eig is not None:
            return self.eig.sigma if n is None else self.eig.sigma[:n]
        return self.cf.eigenvalues(n)

    def evaluator(self, method, n=None):
        if method == "residues":
            return lambda pair: lambda2(self.cf, self.psd, pair)
        if method == "eigensum":
            if self.eig is not None:
                return lambda pair: lambda2(self.eig, self.psd, pair, A1=self.A1, N=n)
            if self.cf.kind == "faraday-infinite":
                raise ConfigError("eigensum is unavailable for infinite depth "
                                  "(continuous spectrum); use residues", "method")
            return lambda pair: lambda2(self.cf, self.psd, pair, method="eigensum", N=n)
        raise ConfigError(f"unknown method {method!r}", "method")


def _settings(cfg, args):
    eps = args.epsilon if args.epsilon is not None else cfg.get("epsilon")
    if eps is not None:
        try:
            eps = float(eps)
        except (TypeError, ValueError):
            raise ConfigError("field 'epsilon' must be a number", "epsilon")
        if not eps >= 0:
            raise ConfigError("field 'epsilon' must be nonnegative", "epsilon")
    method = args.method or cfg.get("method", "residues")
    if method not in ("residues", "eigensum", "both"):
        raise ConfigError("field 'method' must be residues, eigensum or both", "method")
    n = args.n if args.n is not None else cfg.get("n")
    n = None if n is None else int(n)
    top_k = int(cfg.get("top_k", 8))
    return eps, method, n, top_k


# ---- analysis ---------------------------------------------------------------

def analyze(prob, eps, method, n, top_k):
    """Returns ``(report, extra)`` where ``extra`` holds the second route for ``both``."""
    sig_n = n
    if prob.model == "faraday" and sig_n is None:
        sig_n = 2 if prob.cf.kind == "faraday-infinite" else 40
    first = "residues" if method == "both" else method
    sigmas = prob.sigmas(sig_n if first == "eigensum" or prob.eig is None else None)
    rep = select_mode_pair(sigmas, prob.evaluator(first, sig_n), top_k=top_k,
                           epsilon=eps, order=prob.order, method=first)
    extra = None
    if method == "both":
        l2e = prob.evaluator("eigensum", sig_n)(rep.pair)
        extra = {"lambda2_eigensum": l2e,
                 "relative_difference": abs(l2e - rep.lambda2) / abs(rep.lambda2)
                 if rep.lambda2 != 0 else abs(l2e)}
    return rep, extra


def _c(z):
    return f"{z.real:.10e}{z.imag:+.10e}j"


def render_report(rep, extra):
    lines = [
        f"mode pair      : ({rep.pair.p}, {rep.pair.q})",
        f"sigma_p        : {_c(rep.pair.sigma_p)}",
        f"sigma_q        : {_c(rep.pair.sigma_q)}",
        f"lambda0        : {_c(rep.lambda0)}",
        f"lambda2        : {_c(rep.lambda2)}  [{rep.method}]",
    ]
    if extra:
        lines.append(f"lambda2        : {_c(extra['lambda2_eigensum'])}  [eigensum]")
        lines.append(f"relative diff  : {extra['relative_difference']:.5e}")
    lines.append(f"epsilon_crit   : {rep.epsilon_crit:.10e}")
    if rep.epsilon is not None:
        lines.append(f"epsilon        : {rep.epsilon:.10e}")
        lines.append(f"lambda         : {_c(rep.lam)}")
    lines.append(f"verdict        : {'stable' if rep.stable else 'unstable'}")
    for d in rep.diagnostics:
        lines.append(f"note           : {d}")
    return "\n".join(lines)


def cmd_analyze(args):
    cfg = load_config(args.config)
    eps, method, n, top_k = _settings(cfg, args)
    prob = Problem(cfg)
    rep, extra = analyze(prob, eps, method, n, top_k)
    if args.json:
        d = rep.as_dict()
        if extra:
            z = extra["lambda2_eigensum"]
            d["lambda2_eigensum"] = [z.real, z.imag]
            d["relative_difference"] = extra["relative_difference"]
        print(json.dumps(d, indent=2, sort_keys=True))
    else:
        print(render_report(rep, extra))
    return 0 if rep.stable else 1


def _echo(cfg):
    return "# config: " + json.dumps(cfg, sort_keys=True, separators=(",", ":"))


def _emit(text, out):
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_sweep(args):
    cfg = load_config(args.config)
    if cfg.get("model") != "faraday":
        raise ConfigError("sweep needs model 'faraday'", "model")
    _, _, n, top_k = _settings(cfg, args)
    base = faraday_params(cfg)
    lo = args.alpha_min if args.alpha_min is not None else cfg.get("alpha_min")
    hi = args.alpha_max if args.alpha_max is not None else cfg.get("alpha_max")
    steps = args.steps if args.steps is not None else cfg.get("steps")
    if lo is None or hi is None or steps is None:
        raise ConfigError("sweep needs alpha_min, alpha_max and steps", "alpha_min")
    lo, hi, steps = float(lo), float(hi), int(steps)
    if not (0 < lo < hi) or steps < 2:
        raise ConfigError("need 0 < alpha_min < alpha_max and steps >= 2", "alpha_min")
    alphas = np.linspace(lo, hi, steps)

    def one(alpha):
        c = dict(cfg)
        c["params"] = dict(cfg["params"], alpha=float(alpha))
        try:
            rep, _ = analyze(Problem(c), None, "residues", n, top_k)
            return (alpha, rep.pair.sigma_p.real, rep.lambda0.real, rep.lambda2.real,
                    rep.epsilon_crit, "")
        except ParamStabError as exc:
            return (alpha, math.nan, math.nan, math.nan, math.nan,
                    type(exc).__name__)

    with ThreadPoolExecutor(max_workers=n_threads()) as ex:
        rows = list(ex.map(one, alphas))
    echo = dict(cfg, alpha_min=lo, alpha_max=hi, steps=steps)
    lines = [_echo(echo), "alpha,re_sigma_p,re_lambda0,re_lambda2,epsilon_crit,error"]
    for r in rows:
        lines.append(",".join([FMT % r[0], FMT % r[1], FMT % r[2], FMT % r[3],
                               FMT % r[4], r[5]]))
    good = [r for r in rows if not r[5] and math.isfinite(r[4])]
    if good:
        best = min(good, key=lambda r: r[4])
        lines.append(f"# minimum: alpha={FMT % best[0]},epsilon_crit={FMT % best[4]}")
    else:
        lines.append("# minimum: none")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _base_params(cfg):
    if cfg.get("model", "faraday") != "faraday":
        raise ConfigError("tables need model 'faraday'", "model")
    if "params" in cfg:
        return faraday_params(cfg)
    return FaradayParams()


def _render_checks(checks, title):
    lines = [f"# {title}"]
    for c in checks:
        lines.append(f"{'PASS' if c.passed else 'FAIL'}  {c.label:<14} "
                     f"ours={c.value:.5e}  reference={c.reference:.5e}  ({c.rule})")
    return "\n".join(lines)


def cmd_table1(args):
    cfg = load_config(args.config)
    base = _base_params(cfg)
    psd = build_psd(cfg)
    errs = tables.truncation_errors(base, psd, threads=n_threads())
    lines = [_echo(cfg), "N," + ",".join(f"L={L:g}" for L in errs)]
    for i, n in enumerate(tables.TRUNCATIONS):
        lines.append(f"{n}," + ",".join(FMT % errs[L][i] for L in errs))
    _emit("\n".join(lines) + "\n", args.out)
    checks = tables.compare_t1(errs)
    print(_render_checks(checks, "truncation error vs reference"), file=sys.stderr)
    return 0 if all(c.passed for c in checks) else 1


def cmd_table2(args):
    cfg = load_config(args.config)
    base = _base_params(cfg)
    psd = build_psd(cfg)
    diffs = tables.depth_differences(base, psd, threads=n_threads())
    lines = [_echo(cfg), "L,relative_difference"]
    lines += [f"{L:g},{FMT % v}" for L, v in diffs.items()]
    _emit("\n".join(lines) + "\n", args.out)
    checks = tables.compare_t2(diffs)
    print(_render_checks(checks, "finite vs infinite depth vs reference"), file=sys.stderr)
    return 0 if all(c.passed for c in checks) else 1


def cmd_psd(args):
    try:
        model = NoisePsd(args.a, args.omega0)
    except ValueError as exc:
        raise ConfigError(str(exc), "a")
    ps = poles_residues(model)
    out = [f"a = {model.a:g}, omega0 = {model.omega0:g}, A_nor = {model.a_nor:.16e}",
           f"poles: {len(ps)}", "m,re_mu,im_mu,re_r,im_r"]
    for i, (mu, r) in enumerate(zip(ps.poles, ps.residues)):
        out.append(f"{i},{FMT % mu.real},{FMT % mu.imag},{FMT % r.real},{FMT % r.imag}")
    s = complex(np.sum(ps.residues))
    out.append(f"sum of residues = {s.real:.8f}{s.imag:+.1e}j  (1/2pi = {1 / (2 * np.pi):.8f})")
    out.append(f"integral of S = {psd_integral(model):.12f}")
    out.append("omega,S")
    for w in np.linspace(0, model.omega0 + 4 * model.a, 9):
        out.append(f"{FMT % w},{FMT % psd_eval(model, w)}")
    if args.z:
        out.append("re_z,im_z,re_G,im_G")
        for zs in args.z:
            z = complex(zs.replace(" ", ""))
            g = gz_closed(model, z)
            out.append(f"{FMT % z.real},{FMT % z.imag},{FMT % g.real},{FMT % g.imag}")
    print("\n".join(out))
    return 0


def cmd_compare(args):
    cfg = load_config(args.config)
    _, _, n, top_k = _settings(cfg, args)
    prob = Problem(cfg)
    if prob.eig is None and prob.cf.kind == "faraday-infinite":
        raise ConfigError("eigensum is unavailable for infinite depth", "params")
    sig_n = n if prob.eig is not None else (n or 40)
    sig = prob.sigmas(sig_n if prob.eig is None else None)
    rows = []
    for p in range(min(top_k, len(sig))):
        exact = ip_residues(prob.cf, prob.psd, sig[p])
        if prob.eig is not None:
            X = chi_full(prob.eig, prob.A1)
            approx = ip_eigensum(sig, X[p, :] * X[:, p], prob.psd, p, n)
        else:
            dfa = np.asarray(prob.cf.derivative(sig), dtype=complex)
            approx = ip_eigensum(sig, chi_products_rank_one(dfa, p), prob.psd, p)
        rows.append((p, sig[p], exact, approx, abs(approx - exact) / abs(exact)))
    lines = [_echo(cfg), "p,re_sigma,im_sigma,re_Ip_residues,im_Ip_residues,"
             "re_Ip_eigensum,im_Ip_eigensum,relative_difference"]
    for p, s, e, a, d in rows:
        lines.append(",".join([str(p)] + [FMT % x for x in
                                          (s.real, s.imag, e.real, e.imag, a.real, a.imag, d)]))
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="paramstab",
        description="Second-moment stability under small noisy parametric forcing.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, eps=True):
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--n", type=int, help="eigenvalue truncation")
        p.add_argument("--method", choices=("residues", "eigensum", "both"))
        if eps:
            p.add_argument("--epsilon", type=float, help="forcing amplitude")
        p.add_argument("--out", help="write CSV here instead of stdout")
        p.add_argument("--json", action="store_true", help="machine-readable report")

    p = sub.add_parser("analyze", help="stability report for one configuration")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="critical amplitude over a wavenumber range")
    common(p, eps=False)
    p.add_argument("--alpha-min", type=float)
    p.add_argument("--alpha-max", type=float)
    p.add_argument("--steps", type=int)
    p.set_defaults(func=cmd_sweep, epsilon=None)

    p = sub.add_parser("table1", help="eigen-sum truncation error study")
    common(p, eps=False)
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("table2", help="finite vs infinite depth study")
    common(p, eps=False)
    p.set_defaults(func=cmd_table2)

    p = sub.add_parser("psd", help="noise model: poles, residues, samples")
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--omega0", type=float, default=10.0)
    p.add_argument("--z", action="append", help="complex point for G, e.g. 0.5+3j")
    p.set_defaults(func=cmd_psd)

    p = sub.add_parser("compare", help="eigen-sum vs pole-sum I_p per mode")
    common(p, eps=False)
    p.set_defaults(func=cmd_compare, epsilon=None)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ParamStabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
