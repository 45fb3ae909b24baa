"""
Monte Carlo experiments.

Replication r draws from ``np.random.SeedSequence(seed, spawn_key=(r,))``,
so results depend only on the seed and the replication index. Work is
split into contiguous chunks over an optional process pool and gathered
in order, which makes output bit-identical for any number of workers.
The default worker count is read from ``LRVTAIL_WORKERS``.
"""
from __future__ import annotations

import csv
import json
import math
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .applications import hac_wald_test, mcmc_monitor
from .bandwidth import (
    arma11_improvement_table,
    ell_andrews_ar1,
    ell_andrews_from_series,
    ell_tail,
    ell_unadjusted_nonparametric,
    kappa_nonparametric,
    pilot_bandwidth,
    xi1_nonparametric,
    xi1_parametric,
)
from .core import bartlett_kernel, lugsail_kernel, sample_autocov
from .estimators import (
    lrv_multi_model,
    lrv_parametric_ar1,
    lrv_prewhitened_ar1,
    lrv_tail_postcolored,
    lrv_unadjusted,
)
from .generators import ARMA11, MA, Generator, MeanShift, Mixture, hac_regression_design
from .models import FitWarning, fit_ar1, fit_maq

__all__ = [
    "TABLE_ESTIMATORS",
    "POLICIES",
    "CSV_COLUMNS",
    "McRunConfig",
    "McResult",
    "default_workers",
    "replicate",
    "true_optimal_bandwidths",
    "run_table_experiment",
    "run_mean_test_experiment",
    "run_multi_model_experiment",
    "run_hac_experiment",
    "run_mcmc_experiment",
    "heatmap_rows",
    "emit",
    "read_csv",
    "AR1Chain",
]

TABLE_ESTIMATORS = ("para", "un", "pw", "tail")
POLICIES = ("true_optimal", "plugin_parametric", "plugin_nonparametric")
CSV_COLUMNS = ("estimator", "a", "b", "n", "mse100", "bias10", "mc_se")
PW_CLAMP = 0.97


def default_workers() -> int:
    try:
        return max(int(os.environ.get("LRVTAIL_WORKERS", "1")), 1)
    except ValueError:
        return 1


def _rng(seed: int, r: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(r,)))


def _run_chunk(task, seed, start, stop):
    return [task(_rng(seed, r)) for r in range(start, stop)]


def replicate(task, replications: int, seed: int, workers: int | None = None) -> np.ndarray:
    """
    Evaluate ``task(rng)`` for each replication and stack the rows.

    ``task`` must be picklable when ``workers > 1``.
    """
    if replications < 1:
        raise ValueError("replications must be at least 1")
    workers = default_workers() if workers is None else max(int(workers), 1)
    if workers == 1:
        rows = _run_chunk(task, seed, 0, replications)
    else:
        bounds = np.linspace(0, replications, min(workers * 4, replications) + 1).astype(int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_chunk, task, seed, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]
            rows = [row for f in futures for row in f.result()]
    return np.asarray(rows, dtype=float)


# ---------------------------------------------------------------------------
# table experiments


@dataclass
class McRunConfig:
    """
    Configuration of a table experiment.

    Attributes
    ----------
    generator : Generator
        Scalar data generator.
    n : int
        Sample size.
    replications : int
        Number of Monte Carlo replications.
    estimators : tuple of str
        Subset of ``para``, ``un``, ``pw``, ``tail``.
    policy : str
        ``true_optimal``, ``plugin_parametric`` or ``plugin_nonparametric``.
    seed : int
        Root seed.
    workers : int, optional
        Process count; ``LRVTAIL_WORKERS`` or 1 by default.
    """

    generator: Generator
    n: int = 400
    replications: int = 5000
    estimators: tuple = TABLE_ESTIMATORS
    policy: str = "true_optimal"
    seed: int = 0
    workers: int | None = None

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if self.policy not in POLICIES:
            raise ValueError(f"unknown policy {self.policy!r}; choose from {POLICIES}")
        bad = set(self.estimators) - set(TABLE_ESTIMATORS)
        if bad:
            raise ValueError(f"unknown estimators {sorted(bad)}")
        self.estimators = tuple(self.estimators)


@dataclass
class McResult:
    """
    Standardized accuracy of each estimator.

    ``mse100`` is 100 MSE / v^2 and ``bias10`` is 10 (E / v - 1); ``mc_se``
    is the Monte Carlo standard error of ``mse100``.
    """

    estimators: tuple
    v: float
    n: int
    replications: int
    mse100: np.ndarray
    bias10: np.ndarray
    mc_se: np.ndarray
    bias_se: np.ndarray
    mean_ell: np.ndarray
    a: float | None = None
    b: float | None = None
    values: np.ndarray | None = field(default=None, repr=False)

    def rows(self) -> list[dict]:
        out = []
        for j, name in enumerate(self.estimators):
            out.append({
                "estimator": name,
                "a": self.a,
                "b": self.b,
                "n": self.n,
                "mse100": float(self.mse100[j]),
                "bias10": float(self.bias10[j]),
                "mc_se": float(self.mc_se[j]),
                "bias_se": float(self.bias_se[j]),
                "mean_ell": float(self.mean_ell[j]),
                "replications": self.replications,
                "v": self.v,
            })
        return out

    def __getitem__(self, name):
        j = self.estimators.index(name)
        return {"mse100": self.mse100[j], "bias10": self.bias10[j], "mc_se": self.mc_se[j]}


def _pw_z_phi(gam: np.ndarray, phi: float) -> float:
    """Lag-one autocorrelation of Z_i = X_i - phi X_{i-1} from autocovariances of X."""
    gz = [(1 + phi * phi) * gam[k] - phi * (gam[abs(k - 1)] + gam[k + 1]) for k in (0, 1)]
    return gz[1] / gz[0]


def true_optimal_bandwidths(gen: Generator, n: int) -> dict:
    """
    Bandwidths computed from population quantities.

    phi_* = gamma_1 / gamma_0, phi_{*z} is the lag-one autocorrelation of
    the series prewhitened at phi_*, and xi_1 = kappa_1 - 2 phi_* / (1 - phi_*^2).
    """
    model = gen.model()
    gam = model.autocovs(2)
    phi = gam[1] / gam[0]
    phi_z = _pw_z_phi(gam, phi)
    xi = model.kappa(1) - 2.0 * phi / (1.0 - phi * phi)
    return {
        "un": ell_andrews_ar1(phi, n),
        "pw": ell_andrews_ar1(phi_z, n, upper=n - 2),
        "tail": ell_tail(xi, bartlett_kernel(), n),
        "phi_star": phi,
        "phi_star_z": phi_z,
        "xi1": xi,
    }


@dataclass(frozen=True)
class _TableTask:
    gen: Generator
    n: int
    estimators: tuple
    policy: str
    ells: tuple = ()

    def _bandwidths(self, x, acf):
        if self.policy == "true_optimal":
            return dict(self.ells)
        n = self.n
        out = {"pw": ell_andrews_from_series(x, prewhitened=True, clamp=PW_CLAMP)}
        if self.policy == "plugin_parametric":
            out["un"] = ell_andrews_ar1(fit_ar1(acf).phi, n)
            if "tail" in self.estimators:
                out["tail"] = ell_tail(xi1_parametric(x), bartlett_kernel(), n)
        else:
            out["un"] = ell_unadjusted_nonparametric(x)
            out["tail"] = ell_tail(xi1_nonparametric(x), bartlett_kernel(), n)
        return out

    def __call__(self, rng):
        x = self.gen.simulate(self.n, rng)
        acf = sample_autocov(x, min(self.n - 1, max(pilot_bandwidth(self.n, 0), 64)))
        ells = self._bandwidths(x, acf)
        kern = bartlett_kernel()
        vals, used = [], []
        for name in self.estimators:
            if name == "para":
                vals.append(lrv_parametric_ar1(x).value)
                used.append(0)
                continue
            ell = int(ells[name])
            if name == "un":
                vals.append(lrv_unadjusted(x, kern, ell, acf=acf if acf.max_lag >= ell else None).value)
            elif name == "pw":
                vals.append(lrv_prewhitened_ar1(x, kern, ell, clamp=PW_CLAMP).value)
            else:
                a = acf if acf.max_lag >= ell else None
                vals.append(lrv_tail_postcolored(x, kern, ell, fit_ar1(acf), acf=a).value)
            used.append(ell)
        return vals + used


def _summarize(values, ells, v, estimators, n, a=None, b=None, keep=False) -> McResult:
    R = values.shape[0]
    err2 = (values - v) ** 2
    mse100 = 100.0 * err2.mean(0) / v**2
    mc_se = 100.0 * err2.std(0, ddof=1) / v**2 / math.sqrt(R) if R > 1 else np.full(len(estimators), np.nan)
    bias10 = 10.0 * (values.mean(0) / v - 1.0)
    bias_se = 10.0 * values.std(0, ddof=1) / v / math.sqrt(R) if R > 1 else np.full(len(estimators), np.nan)
    return McResult(tuple(estimators), float(v), n, R, mse100, bias10, mc_se, bias_se, ells.mean(0), a, b,
                    values if keep else None)


def _ab(gen):
    if isinstance(gen, ARMA11):
        return gen.a, gen.b
    return None, None


def run_table_experiment(cfg: McRunConfig, keep_values: bool = False) -> McResult:
    """
    Standardized MSE and bias of the scalar estimators for one generator.
    """
    ells = ()
    if cfg.policy == "true_optimal":
        opt = true_optimal_bandwidths(cfg.generator, cfg.n)
        ells = tuple((k, opt[k]) for k in ("un", "pw", "tail"))
    task = _TableTask(cfg.generator, cfg.n, cfg.estimators, cfg.policy, ells)
    out = replicate(task, cfg.replications, cfg.seed, cfg.workers)
    J = len(cfg.estimators)
    a, b = _ab(cfg.generator)
    return _summarize(out[:, :J], out[:, J:], cfg.generator.true_lrv(), cfg.estimators, cfg.n, a, b, keep_values)


# ---------------------------------------------------------------------------
# mean test

MEAN_TEST_STATS = ("para", "un", "lug", "pw", "tail", "sn")


def _mean_test_stats(x) -> list[float]:
    n = x.shape[0]
    xbar = x.mean()
    num = n * xbar * xbar
    kern = bartlett_kernel()
    ell_un = ell_andrews_from_series(x)
    acf = sample_autocov(x, min(n - 1, max(ell_un, 2)))
    phi_model = fit_ar1(acf)
    ell_tail_ = ell_tail(xi1_parametric(x), kern, n)
    vs = [
        lrv_parametric_ar1(x).value,
        lrv_unadjusted(x, kern, ell_un, acf=acf).value,
        lrv_unadjusted(x, lugsail_kernel(), ell_un, acf=acf).value,
        lrv_prewhitened_ar1(x, kern, ell_andrews_from_series(x, True, PW_CLAMP), clamp=PW_CLAMP).value,
        lrv_tail_postcolored(x, kern, ell_tail_, phi_model).value,
    ]
    s = np.cumsum(x - xbar)
    vs.append(float(s @ s) / n**2)
    return [num / v if v > 0 else math.inf for v in vs]


@dataclass(frozen=True)
class _MeanTask:
    phi: float
    mu: float
    n: int

    def __call__(self, rng):
        gen = MeanShift(self.mu, ARMA11(self.phi, 0.0, (1.0 - self.phi) ** 2))
        return _mean_test_stats(gen.simulate(self.n, rng))


def run_mean_test_experiment(phis=(0.0, 0.7, 0.8, 0.9, 0.95, 0.97, 0.99), mus=(0.0, 0.2), n: int = 200,
                             replications: int = 5000, calibration_reps: int = 20000, alpha: float = 0.05,
                             seed: int = 0, workers: int | None = None) -> dict:
    """
    Size and power of mean tests T = n Xbar^2 / v_hat and the self-normalized test.

    Critical values are the 1 - alpha quantiles of each statistic under
    i.i.d. N(0, 1) data of the same length.

    Returns
    -------
    dict
        ``critical_values`` per statistic and ``rows`` of rejection rates (%).
    """
    calib = replicate(_MeanTask(0.0, 0.0, n), calibration_reps, seed + 1, workers)
    crit = np.quantile(calib, 1.0 - alpha, axis=0)
    rows = []
    for i, mu in enumerate(mus):
        for j, phi in enumerate(phis):
            stats_ = replicate(_MeanTask(float(phi), float(mu), n), replications, seed + 1000 * (i + 1) + j + 2,
                               workers)
            rates = 100.0 * (stats_ > crit).mean(0)
            row = {"mu": float(mu), "phi": float(phi), "n": n}
            row.update({name: float(r) for name, r in zip(MEAN_TEST_STATS, rates)})
            rows.append(row)
    return {"critical_values": dict(zip(MEAN_TEST_STATS, crit.tolist())), "rows": rows}


# ---------------------------------------------------------------------------
# multi-model switching

MA5_THETAS = (0.6, 0.0, 0.0, 0.3, -0.3)
MULTI_ESTIMATORS = ("tail_ar1", "tail_ma5", "tail_multi")


def multi_model_generator(c: float) -> Mixture:
    """sqrt(1 - c^2) AR(1)(0.6) + c MA(5), both scaled to unit LRV."""
    ar = ARMA11(0.6, 0.0, 0.16)
    ma = MA(MA5_THETAS, 1.0 / (1.0 + sum(MA5_THETAS)) ** 2)
    return Mixture((math.sqrt(1.0 - c * c), c), (ar, ma))


@dataclass(frozen=True)
class _MultiTask:
    c: float
    n: int

    def __call__(self, rng):
        x = multi_model_generator(self.c).simulate(self.n, rng)
        n = self.n
        kern = bartlett_kernel()
        acf = sample_autocov(x, min(n - 1, pilot_bandwidth(n, 0)))
        with warnings.catch_warnings():
            # per-replication shrinkage notices would flood the experiment output
            warnings.simplefilter("ignore", FitWarning)
            models = [fit_ar1(acf), fit_maq(x, 5)]
        kap = kappa_nonparametric(x, acf=acf).kappa
        xis = [kap - m.kappa(1) for m in models]
        ells = [ell_tail(xi, kern, n) for xi in xis]
        singles = [lrv_tail_postcolored(x, kern, ell, m).value for ell, m in zip(ells, models)]
        multi = lrv_multi_model(x, kern, models, bandwidths=ells, xis=xis).value
        return singles + [multi]


def run_multi_model_experiment(cs=(0.0, 0.25, 0.5, 0.75, 1.0), n: int = 200, replications: int = 1000,
                               seed: int = 0, workers: int | None = None) -> list[dict]:
    """RMSE and bias of the AR(1), MA(5) and adaptive two-model tail estimators (v = 1)."""
    rows = []
    for i, c in enumerate(cs):
        vals = replicate(_MultiTask(float(c), n), replications, seed + i, workers)
        rmse = np.sqrt(((vals - 1.0) ** 2).mean(0))
        bias = vals.mean(0) - 1.0
        for name, r, bb in zip(MULTI_ESTIMATORS, rmse, bias):
            rows.append({"c": float(c), "estimator": name, "n": n, "rmse": float(r), "bias": float(bb)})
    return rows


# ---------------------------------------------------------------------------
# HAC regression

HAC_ESTIMATORS = ("un", "pw", "lugsail", "tail")


@dataclass(frozen=True)
class _HacTask:
    a: float
    b: float
    delta: float
    n: int
    methods: tuple
    alpha: float

    def __call__(self, rng):
        X, y = hac_regression_design(self.n, self.a, self.b, self.delta, rng)
        return [float(hac_wald_test(X, y, m, self.alpha).reject) for m in self.methods]


def run_hac_experiment(a: float = 0.2, b: float | None = None, deltas=(0.0,), n: int = 400,
                       replications: int = 2000, methods=HAC_ESTIMATORS, alpha: float = 0.05, seed: int = 0,
                       workers: int | None = None) -> list[dict]:
    """Rejection rates of HAC Wald tests of beta = 0 over a grid of delta."""
    b = a if b is None else b
    rows = []
    for i, delta in enumerate(deltas):
        rej = replicate(_HacTask(a, b, float(delta), n, tuple(methods), alpha), replications, seed + i, workers)
        rates = rej.mean(0)
        for m, r in zip(methods, rates):
            se = math.sqrt(max(r * (1 - r), 1e-12) / replications)
            rows.append({"a": a, "b": b, "delta": float(delta), "n": n, "method": m, "rejection": float(r),
                         "mc_se": se})
    return rows


# ---------------------------------------------------------------------------
# MCMC analogue


class AR1Chain:
    """
    Stateful AR(1) sampler used as a synthetic Markov chain.

    Draws are X_i = phi X_{i-1} + sigma e_i started from stationarity.
    """

    def __init__(self, phi: float, sigma: float, rng, mean: float = 0.0):
        self.phi, self.sigma, self.mean = float(phi), float(sigma), float(mean)
        self.rng = rng
        self.state = rng.standard_normal() * sigma / math.sqrt(1.0 - phi * phi)

    def __call__(self, k: int) -> np.ndarray:
        e = self.rng.standard_normal(k) * self.sigma
        y, _ = signal.lfilter([1.0], [1.0, -self.phi], e, zi=[self.phi * self.state])
        self.state = y[-1]
        return y + self.mean

    @property
    def lrv(self) -> float:
        return self.sigma**2 / (1.0 - self.phi) ** 2


@dataclass(frozen=True)
class _McmcTask:
    phi: float
    sigma: float
    methods: tuple
    epsilon: float
    alpha: float
    check_every: int
    n_dagger: int
    max_n: int
    rule: str = "default"

    def __call__(self, rng):
        seeds = rng.integers(0, 2**63 - 1, size=len(self.methods))
        out = []
        for m, s in zip(self.methods, seeds):
            chain = AR1Chain(self.phi, self.sigma, np.random.default_rng(int(s)))
            res = mcmc_monitor(chain, m, self.epsilon, self.alpha, self.check_every, self.n_dagger, self.max_n,
                               self.rule)
            out += [float(abs(res.mean) <= res.half_width), float(res.n)]
        return out


def run_mcmc_experiment(phi: float = 0.95, sigma: float | None = None, methods=("un", "pw", "tail"),
                        epsilon: float = 0.05, alpha: float = 0.01, check_every: int = 500, n_dagger: int = 100,
                        replications: int = 500, max_n: int = 10**6, rule: str = "parametric", seed: int = 0,
                        workers: int | None = None) -> list[dict]:
    """
    Coverage of fixed-width intervals on a synthetic AR(1) chain with mean 0.

    ``sigma`` defaults to 1 - phi, which gives unit LRV.
    """
    sigma = 1.0 - phi if sigma is None else sigma
    task = _McmcTask(phi, sigma, tuple(methods), epsilon, alpha, check_every, n_dagger, max_n, rule)
    out = replicate(task, replications, seed, workers)
    rows = []
    for j, m in enumerate(methods):
        cov, ns = out[:, 2 * j], out[:, 2 * j + 1]
        rows.append({"method": m, "phi": phi, "epsilon": epsilon, "coverage": float(cov.mean()),
                     "mean_n": float(ns.mean()), "replications": replications})
    return rows


# ---------------------------------------------------------------------------
# heat map and output


def heatmap_rows(a_grid=None, b_grid=None) -> list[dict]:
    """Asymptotic MSE differences over an ARMA(1,1) grid."""
    grid = np.round(np.arange(-0.95, 0.951, 0.05), 10)
    return arma11_improvement_table(grid if a_grid is None else a_grid, grid if b_grid is None else b_grid)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def emit(rows, path, fmt: str = "csv", columns=None) -> None:
    """
    Write result rows as CSV or JSON.

    ``columns`` fixes the CSV column order; by default it is
    ``CSV_COLUMNS`` when rows carry those keys, otherwise the keys of the
    first row. ``path`` may be ``"-"`` for stdout.
    """
    rows = [r for r in (rows.rows() if isinstance(rows, McResult) else rows)]
    if columns is None:
        columns = list(CSV_COLUMNS) if not rows or set(CSV_COLUMNS) <= set(rows[0]) else list(rows[0])
    try:
        fh = sys.stdout if str(path) == "-" else open(path, "w", newline="")
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
    try:
        if fmt == "csv":
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for r in rows:
                w.writerow([_fmt(r.get(c)) for c in columns])
        elif fmt == "json":
            json.dump([{c: r.get(c) for c in columns} if columns else r for r in rows], fh, indent=1,
                      default=_json_default)
            fh.write("\n")
        else:
            raise ValueError(f"unknown format {fmt!r}")
    finally:
        if fh is not sys.stdout:
            fh.close()


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"cannot serialize {type(o)}")


def read_csv(path) -> list[dict]:
    """Parse a CSV written by :func:`emit`, converting numeric fields to float."""
    out = []
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            row = {}
            for k, v in r.items():
                try:
                    row[k] = float(v) if v != "" else None
                except ValueError:
                    row[k] = v
            out.append(row)
    return out
