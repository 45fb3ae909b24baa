"""
Command-line interface.

Every subcommand accepts ``--config FILE`` with a JSON object whose keys
are option names (dashes or underscores); options given on the command
line take precedence.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .applications import hac_wald_test, mcmc_monitor
from .auto import BANDWIDTH_RULES, METHODS, estimate_lrv, select_bandwidth
from .bandwidth import ell_andrews_from_series, ell_tail, improvement_region_ar1, xi1_nonparametric
from .core import get_kernel
from .estimators import lrv_multi_model, lrv_tail_finite_sample, lrv_tail_postcolored, lrv_tail_postcolored_general
from .generators import ARMA11
from .io import read_matrix, read_series
from .models import ARMA11Model, fit_ar1, fit_maq, model_from_dict
from .montecarlo import (
    AR1Chain,
    McRunConfig,
    emit,
    heatmap_rows,
    run_hac_experiment,
    run_mcmc_experiment,
    run_mean_test_experiment,
    run_table_experiment,
)
from .multivariate import (
    cov_lugsail,
    cov_prewhitened_var1,
    cov_tail_postcolored,
    cov_unadjusted,
    ell_andrews_multivariate,
    ell_tail_multivariate,
)
from .spectral import fold_frequency, spectral_tail_postcolored, spectral_unadjusted

TABLE_A = (-0.8, -0.4, -0.2, 0.2, 0.4, 0.8)
TABLE_B = (0.0, -0.6)
MODEL_METHODS = ("tail-general", "tail-fs", "multi")


def _floats(s: str) -> list[float]:
    return [float(v) for v in s.split(",") if v.strip()]


def _ell(s: str):
    return s if s == "auto" else int(s)


def _json_out(obj, path="-"):
    text = json.dumps(obj, indent=1, default=lambda o: o.tolist() if isinstance(o, np.ndarray) else float(o))
    if path == "-":
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_estimate(args):
    if args.multivariate:
        _, x = read_matrix(args.input, args.columns.split(",") if args.columns else None)
        kernel = get_kernel(args.kernel)
        auto = args.ell == "auto"
        if args.method == "tail":
            ell = ell_tail_multivariate(x, kernel=kernel) if auto else args.ell
            est = cov_tail_postcolored(x, kernel, ell)
        elif args.method == "pw":
            ell = ell_andrews_multivariate(x, prewhitened=True) if auto else args.ell
            est = cov_prewhitened_var1(x, kernel, ell)
        elif args.method == "lugsail":
            est = cov_lugsail(x, ell_andrews_multivariate(x) if auto else args.ell)
        elif args.method == "un":
            est = cov_unadjusted(x, kernel, ell_andrews_multivariate(x) if auto else args.ell)
        else:
            raise SystemExit(f"method {args.method!r} is not available for multivariate input")
        _json_out(est.to_dict(), args.out)
        return 0
    x = read_series(args.input, args.column)
    if args.method in MODEL_METHODS or (args.method == "tail" and args.model != "auto-ar1"):
        _json_out(_model_estimate(x, args).to_dict(), args.out)
        return 0
    methods = METHODS if args.method == "all" else (args.method,)
    out = [estimate_lrv(x, m, get_kernel(args.kernel), args.ell, args.rule, args.clamp).to_dict() for m in methods]
    _json_out(out if len(out) > 1 else out[0], args.out)
    return 0


def _load_model(source: str):
    if source == "auto-ar1":
        return None
    text = source if source.lstrip().startswith("{") else Path(source).read_text()
    return model_from_dict(json.loads(text))


def _model_estimate(x, args):
    kernel = get_kernel(args.kernel)
    model = _load_model(args.model)
    if model is None:
        model = fit_ar1(x)
    auto = args.ell == "auto"
    if args.method == "multi":
        models = [model, fit_maq(x, args.ma_order)]
        return lrv_multi_model(x, kernel, models, None if auto else [args.ell] * len(models))
    ell = select_bandwidth(x, "tail", args.rule, kernel) if auto else args.ell
    if args.method == "tail-general":
        return lrv_tail_postcolored_general(x, kernel, get_kernel(args.kernel_h or args.kernel), ell, model)
    if args.method == "tail-fs":
        return lrv_tail_finite_sample(x, kernel, ell, model)
    return lrv_tail_postcolored(x, kernel, ell, model)


def cmd_spectrum(args):
    x = read_series(args.input, args.column)
    n = x.shape[0]
    kernel = get_kernel(args.kernel)
    if args.omega:
        omega = fold_frequency(_floats(args.omega))
    else:
        omega = np.linspace(0.0, math.pi, args.omega_grid)
    ell = args.ell
    if ell == "auto":
        ell = ell_tail(xi1_nonparametric(x), kernel, n) if args.method == "tail" else ell_andrews_from_series(x)
    fn = spectral_tail_postcolored if args.method == "tail" else spectral_unadjusted
    est = fn(x, kernel, int(ell), omega)
    rows = [{"omega": float(w), "value": float(v)} for w, v in zip(est.omega, est.value)]
    emit(rows, args.out, "csv", columns=["omega", "value"])
    return 0


def cmd_analyze(args):
    if args.what == "improvement":
        model = ARMA11Model(args.a, args.b, 1.0)
        lo, hi = improvement_region_ar1(model.kappa(1))
        _json_out({"a": args.a, "b": args.b, "kappa1": model.kappa(1), "lower": lo, "upper": hi}, args.out)
    return 0


def _table_rows(args, policy):
    rows = []
    a_grid = _floats(args.a) if args.a else TABLE_A
    b_grid = _floats(args.b) if args.b else TABLE_B
    for i, b in enumerate(b_grid):
        for j, a in enumerate(a_grid):
            cfg = McRunConfig(ARMA11(a, b), args.n, args.reps, policy=policy, seed=args.seed + 100 * i + j,
                              workers=args.workers)
            rows += run_table_experiment(cfg).rows()
    return rows


def cmd_simulate(args):
    exp = args.experiment
    if exp in ("table1", "table2"):
        policy = args.policy or ("true_optimal" if exp == "table1" else "plugin_parametric")
        rows = _table_rows(args, policy)
        emit(rows, args.out, args.format)
    elif exp == "heatmap":
        rows = heatmap_rows(_floats(args.a) if args.a else None, _floats(args.b) if args.b else None)
        emit(rows, args.out, args.format, columns=list(rows[0]) if rows else ["a", "b"])
    elif exp == "mean-test":
        res = run_mean_test_experiment(
            _floats(args.phi) if args.phi else (0.0, 0.7, 0.8, 0.9, 0.95, 0.97, 0.99),
            _floats(args.mu) if args.mu else (0.0, 0.2),
            args.n, args.reps, args.calibration_reps, args.alpha, args.seed, args.workers)
        emit(res["rows"], args.out, args.format, columns=list(res["rows"][0]))
    elif exp == "hac-power":
        rows = []
        for i, a in enumerate(_floats(args.a) if args.a else (0.2, 0.4, 0.8)):
            rows += run_hac_experiment(a, None, _floats(args.delta) if args.delta else (0.0,), args.n, args.reps,
                                       alpha=args.alpha, seed=args.seed + i, workers=args.workers)
        emit(rows, args.out, args.format, columns=list(rows[0]))
    elif exp == "mcmc":
        rows = run_mcmc_experiment(args.ar_phi, epsilon=args.eps, alpha=args.alpha, replications=args.reps,
                                   check_every=args.check_every, seed=args.seed, workers=args.workers)
        emit(rows, args.out, args.format, columns=list(rows[0]))
    return 0


def cmd_hac_test(args):
    header, data = read_matrix(args.input)
    ridx = data.shape[1] - 1
    if args.response is not None:
        ridx = header.index(args.response) if header and args.response in header else int(args.response)
    y = data[:, ridx]
    X = np.delete(data, ridx, axis=1)
    if args.intercept:
        X = np.column_stack([np.ones(X.shape[0]), X])
    res = hac_wald_test(X, y, args.method, args.alpha, ell=args.ell)
    _json_out(res.to_dict(), args.out)
    return 0


def cmd_mcmc_monitor(args):
    if args.input:
        source = read_series(args.input, args.column)
    else:
        sigma = args.sigma if args.sigma is not None else 1.0
        source = AR1Chain(args.ar_phi, sigma, np.random.default_rng(args.seed))
    res = mcmc_monitor(source, args.method, args.eps, args.alpha, args.check_every, args.min_n, args.max_n,
                       args.rule)
    _json_out(res.to_dict(), args.out)
    return 0


# ---------------------------------------------------------------------------
# parser


def _common(p):
    p.add_argument("--config", help="JSON file of option defaults")
    p.add_argument("--out", default="-", help="output path, '-' for stdout")


def _sim_common(p):
    p.add_argument("--reps", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None, help="process count (default: LRVTAIL_WORKERS or 1)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lrvtail", description="Tail-postcolored long-run variance estimation")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = sub.add_parser("estimate", help="estimate the LRV of a series")
    _common(p)
    p.add_argument("input", help="CSV or whitespace text file, '-' for stdin")
    p.add_argument("--column", default=None, help="column name or index (default: first)")
    p.add_argument("--method", default="tail", choices=METHODS + MODEL_METHODS + ("all",))
    p.add_argument("--kernel", default="bartlett", choices=("bartlett", "truncated", "lugsail"))
    p.add_argument("--ell", type=_ell, default="auto", help="bandwidth or 'auto'")
    p.add_argument("--rule", default="default", choices=BANDWIDTH_RULES)
    p.add_argument("--clamp", type=float, default=0.97, help="prewhitening bound on |phi|")
    p.add_argument("--model", default="auto-ar1",
                   help="coloring model as JSON {kind, params, innovation_var} (inline or file) or 'auto-ar1'")
    p.add_argument("--kernel-h", default=None, choices=("bartlett", "truncated", "lugsail"),
                   help="second kernel for tail-general (default: --kernel)")
    p.add_argument("--ma-order", type=int, default=5, help="order of the MA model added by 'multi'")
    p.add_argument("--multivariate", action="store_true", help="estimate a long-run covariance matrix")
    p.add_argument("--columns", default=None, help="comma-separated columns for --multivariate")
    p.set_defaults(func=cmd_estimate)
    subs["estimate"] = p

    p = sub.add_parser("spectrum", help="spectral density estimates on a frequency grid")
    _common(p)
    p.add_argument("input")
    p.add_argument("--column", default=None)
    p.add_argument("--method", default="tail", choices=("tail", "un"))
    p.add_argument("--kernel", default="bartlett", choices=("bartlett", "truncated", "lugsail"))
    p.add_argument("--ell", type=_ell, default="auto")
    p.add_argument("--omega-grid", type=int, default=65, help="number of equally spaced points on [0, pi]")
    p.add_argument("--omega", default=None, help="comma-separated frequencies, folded onto [0, pi]")
    p.set_defaults(func=cmd_spectrum)
    subs["spectrum"] = p

    p = sub.add_parser("analyze", help="asymptotic analyses")
    _common(p)
    p.add_argument("what", choices=("improvement",))
    p.add_argument("--a", type=float, default=0.9, help="ARMA(1,1) AR coefficient of the truth")
    p.add_argument("--b", type=float, default=0.0, help="ARMA(1,1) MA coefficient of the truth")
    p.set_defaults(func=cmd_analyze)
    subs["analyze"] = p

    p = sub.add_parser("simulate", help="Monte Carlo experiments")
    _common(p)
    p.add_argument("experiment", choices=("table1", "table2", "heatmap", "mean-test", "hac-power", "mcmc"))
    _sim_common(p)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--a", default=None, help="comma-separated a values")
    p.add_argument("--b", default=None, help="comma-separated b values")
    p.add_argument("--policy", default=None, choices=("true_optimal", "plugin_parametric", "plugin_nonparametric"))
    p.add_argument("--phi", default=None, help="mean test: comma-separated AR coefficients")
    p.add_argument("--mu", default=None, help="mean test: comma-separated means")
    p.add_argument("--calibration-reps", type=int, default=20000)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--delta", default=None, help="hac-power: comma-separated effect sizes")
    p.add_argument("--ar-phi", type=float, default=0.95, help="mcmc: AR coefficient of the synthetic chain")
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--check-every", type=int, default=500)
    p.set_defaults(func=cmd_simulate)
    subs["simulate"] = p

    p = sub.add_parser("hac-test", help="HAC Wald test of beta = 0")
    _common(p)
    p.add_argument("input", help="CSV with regressors and the response")
    p.add_argument("--response", default=None, help="response column name or index (default: last)")
    p.add_argument("--intercept", action="store_true", help="prepend a constant column")
    p.add_argument("--method", default="tail", choices=("un", "pw", "lugsail", "tail"))
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--ell", type=_ell, default="auto")
    p.set_defaults(func=cmd_hac_test)
    subs["hac-test"] = p

    p = sub.add_parser("mcmc-monitor", help="fixed-width stopping on a chain")
    _common(p)
    p.add_argument("--input", default=None, help="file of chain draws; otherwise a synthetic AR(1) chain")
    p.add_argument("--column", default=None)
    p.add_argument("--ar-phi", type=float, default=0.9)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", default="tail", choices=METHODS)
    p.add_argument("--rule", default="default", choices=BANDWIDTH_RULES)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--check-every", type=int, default=500)
    p.add_argument("--min-n", type=int, default=100)
    p.add_argument("--max-n", type=int, default=10**7)
    p.set_defaults(func=cmd_mcmc_monitor)
    subs["mcmc-monitor"] = p

    parser._subcommands = subs
    return parser


_SIM_DEFAULTS = {
    "table1": {"n": 400, "alpha": 0.05},
    "table2": {"n": 400, "alpha": 0.05},
    "heatmap": {"n": 400, "alpha": 0.05},
    "mean-test": {"n": 200, "alpha": 0.05},
    "hac-power": {"n": 400, "alpha": 0.05},
    "mcmc": {"n": 0, "alpha": 0.01},
}


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, ValueError) as exc:
            parser.error(f"cannot read config {args.config}: {exc}")
        if not isinstance(cfg, dict):
            parser.error("config must be a JSON object")
        sp = parser._subcommands[args.command]
        known = {a.dest for a in sp._actions}
        clean = {k.replace("-", "_"): v for k, v in cfg.items()}
        unknown = set(clean) - known
        if unknown:
            parser.error(f"unknown config keys: {sorted(unknown)}")
        sp.set_defaults(**clean)
        args = parser.parse_args(argv)
    if args.command == "simulate":
        for key, val in _SIM_DEFAULTS[args.experiment].items():
            if getattr(args, key) is None:
                setattr(args, key, val)
    return args


def main(argv=None) -> int:
    args = parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, np.linalg.LinAlgError) as exc:
        print(f"lrvtail: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
