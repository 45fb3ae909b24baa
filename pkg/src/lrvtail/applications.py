"""
Downstream procedures: HAC Wald tests for regression coefficients and the
fixed-width stopping rule for MCMC output analysis.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .auto import estimate_lrv
from .multivariate import (
    CovEstimate,
    cov_lugsail,
    cov_prewhitened_var1,
    cov_tail_postcolored,
    cov_unadjusted,
    ell_andrews_multivariate,
    ell_tail_multivariate,
)
from .models import fit_var1

__all__ = [
    "RegressionProblem",
    "OlsFit",
    "WaldResult",
    "StoppingState",
    "MonitorResult",
    "ols_fit",
    "score_series",
    "hac_covariance",
    "hac_wald_test",
    "wald_critical_value",
    "fixed_width_should_stop",
    "half_width",
    "mcmc_monitor",
]

HAC_METHODS = ("un", "pw", "lugsail", "tail")


@dataclass
class RegressionProblem:
    """Linear model y = X beta + e with an n x d design."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        y = np.asarray(self.y, dtype=float).ravel()
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise ValueError(f"design {X.shape} and response {y.shape} do not conform")
        if X.shape[0] <= X.shape[1]:
            raise ValueError("need more observations than regressors")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("design and response must be finite")
        self.X, self.y = X, y

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


@dataclass
class OlsFit:
    beta: np.ndarray
    resid: np.ndarray
    S: np.ndarray


@dataclass
class WaldResult:
    """
    HAC Wald test of H0: beta = beta0.

    ``reject`` is ``statistic > critical_value``.
    """

    statistic: float
    critical_value: float
    p_value: float
    reject: bool
    cov_method: str
    ell: int
    df: tuple
    beta: np.ndarray = None
    floored: bool = False

    def to_dict(self) -> dict:
        return {
            "statistic": float(self.statistic),
            "critical_value": float(self.critical_value),
            "p_value": float(self.p_value),
            "reject": bool(self.reject),
            "cov_method": self.cov_method,
            "ell": int(self.ell),
            "df": list(self.df),
            "beta": None if self.beta is None else np.asarray(self.beta).tolist(),
            "floored": bool(self.floored),
        }


def _problem(X, y=None) -> RegressionProblem:
    return X if isinstance(X, RegressionProblem) else RegressionProblem(X, y)


def ols_fit(X, y=None) -> OlsFit:
    """
    Least squares beta = S_n^{-1} sum X_i y_i / n with S_n = X^T X / n.

    Raises
    ------
    numpy.linalg.LinAlgError
        If the design is rank deficient.
    """
    p = _problem(X, y)
    S = p.X.T @ p.X / p.n
    if np.linalg.matrix_rank(p.X) < p.d:
        raise np.linalg.LinAlgError("design matrix is rank deficient")
    beta = np.linalg.solve(S, p.X.T @ p.y / p.n)
    return OlsFit(beta, p.y - p.X @ beta, S)


def score_series(X, resid) -> np.ndarray:
    """W_i = e_i X_i, an n x d array."""
    return np.asarray(X, dtype=float) * np.asarray(resid, dtype=float)[:, None]


def hac_covariance(W, method: str = "tail", ell="auto", floor: bool = True) -> CovEstimate:
    """
    Long-run covariance of a score series with automatic bandwidths.

    ``un``, ``pw`` and ``lugsail`` use the multivariate Andrews AR(1)
    plug-in (on the VAR(1) residuals for ``pw``); ``tail`` uses the
    trace-aggregated tail plug-in.
    """
    if method not in HAC_METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {HAC_METHODS}")
    W = np.asarray(W, dtype=float)
    auto = ell == "auto"
    if method == "un":
        return cov_unadjusted(W, ell=ell_andrews_multivariate(W) if auto else ell, floor=floor)
    if method == "lugsail":
        return cov_lugsail(W, ell=ell_andrews_multivariate(W) if auto else ell, floor=floor)
    model = fit_var1(W)
    if method == "pw":
        ell = ell_andrews_multivariate(W, prewhitened=True) if auto else ell
        return cov_prewhitened_var1(W, ell=ell, floor=floor, model=model)
    ell = ell_tail_multivariate(W, model) if auto else ell
    return cov_tail_postcolored(W, ell=ell, model=model, floor=floor)


def wald_critical_value(alpha: float, d: int, n: int) -> float:
    """F-scaled critical value d (n - 1) F_{1-alpha, d, n-d} / (n - d)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return d * (n - 1) * stats.f.ppf(1.0 - alpha, d, n - d) / (n - d)


def hac_wald_test(X, y=None, method: str = "tail", alpha: float = 0.05, beta0=None, ell="auto",
                  floor: bool = True) -> WaldResult:
    """
    HAC Wald test of H0: beta = beta0 (zero by default).

    The statistic is n (b - b0)^T Sigma^{-1} (b - b0) with sandwich
    Sigma = S_n^{-1} V S_n^{-1} and V a long-run covariance estimate of
    the score series.

    Raises
    ------
    numpy.linalg.LinAlgError
        If the sandwich covariance is singular, including a perfect fit.
    """
    p = _problem(X, y)
    fit = ols_fit(p)
    scale = max(np.linalg.norm(p.y), 1e-300)
    if np.linalg.norm(fit.resid) <= 1e-10 * scale:
        raise np.linalg.LinAlgError("residuals vanish (perfect fit); sandwich covariance is singular")
    W = score_series(p.X, fit.resid)
    V = hac_covariance(W, method, ell, floor)
    sandwich = np.linalg.solve(fit.S, np.linalg.solve(fit.S, V.matrix).T)
    sandwich = (sandwich + sandwich.T) / 2.0
    if np.linalg.cond(sandwich) > 1e14:
        raise np.linalg.LinAlgError("sandwich covariance is singular")
    delta = fit.beta - (np.zeros(p.d) if beta0 is None else np.asarray(beta0, dtype=float))
    stat = float(p.n * delta @ np.linalg.solve(sandwich, delta))
    n, d = p.n, p.d
    crit = wald_critical_value(alpha, d, n)
    pval = float(stats.f.sf(stat * (n - d) / (d * (n - 1)), d, n - d))
    return WaldResult(stat, crit, pval, stat > crit, method, V.ell, (d, n - d), fit.beta, V.floored)


# ---------------------------------------------------------------------------
# fixed-width stopping


@dataclass
class StoppingState:
    """Current state of a fixed-width simulation."""

    n: int
    v_hat: float
    epsilon: float
    alpha: float = 0.05
    n_dagger: int = 100

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.n_dagger < 1:
            raise ValueError("n_dagger must be at least 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")


def half_width(v_hat: float, n: int, alpha: float) -> float:
    """z_{1-alpha/2} sqrt(v_hat / n)."""
    return float(stats.norm.ppf(1.0 - alpha / 2.0) * math.sqrt(max(v_hat, 0.0) / n))


def fixed_width_should_stop(state: StoppingState) -> bool:
    """
    True iff z_{1-alpha/2} sqrt(v_hat / n) + epsilon 1(n <= n_dagger) < epsilon.
    """
    v = state.v_hat
    if v < 0:
        warnings.warn("negative LRV estimate treated as zero", RuntimeWarning, stacklevel=2)
        v = 0.0
    if state.n <= state.n_dagger:
        return False
    return half_width(v, state.n, state.alpha) < state.epsilon


@dataclass
class MonitorResult:
    """Outcome of :func:`mcmc_monitor`."""

    n: int
    mean: float
    half_width: float
    v_hat: float
    stopped: bool
    exhausted: bool = False
    checks: int = 0
    method: str = "tail"
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n": int(self.n),
            "mean": float(self.mean),
            "half_width": float(self.half_width),
            "v_hat": float(self.v_hat),
            "stopped": bool(self.stopped),
            "exhausted": bool(self.exhausted),
            "checks": int(self.checks),
            "method": self.method,
        }


def _block_reader(source):
    if callable(source):
        return lambda k: np.asarray(source(k), dtype=float).ravel()
    it = iter(np.asarray(source, dtype=float).ravel()) if isinstance(source, np.ndarray) else iter(source)
    return lambda k: np.fromiter(itertools.islice(it, k), dtype=float)


def mcmc_monitor(chain_source, method: str = "tail", epsilon: float = 0.1, alpha: float = 0.05,
                 check_every: int = 500, n_dagger: int = 100, max_n: int | None = None,
                 rule: str = "default") -> MonitorResult:
    """
    Run a chain until the fixed-width rule fires.

    Parameters
    ----------
    chain_source : callable or iterable
        ``chain_source(k)`` returning k further draws, or an iterable of
        scalars.
    method : str
        LRV estimator tag passed to :func:`lrvtail.auto.estimate_lrv`.
    epsilon, alpha : float
        Target half-width and nominal level.
    check_every : int
        Draws between evaluations of the rule.
    n_dagger : int
        Minimum sample size.
    max_n : int, optional
        Hard cap on the chain length; reaching it sets ``exhausted``.
    rule : str
        Bandwidth rule.
    """
    StoppingState(0, 0.0, epsilon, alpha, n_dagger)
    if check_every < 1:
        raise ValueError("check_every must be at least 1")
    read = _block_reader(chain_source)
    chunks, n, v_hat, checks = [], 0, math.nan, 0
    while True:
        k = check_every if max_n is None else min(check_every, max_n - n)
        block = read(k) if k > 0 else np.empty(0)
        if block.size:
            chunks.append(block)
            n += block.size
        short = block.size < k or k == 0
        if n >= 4 and block.size:
            chain = np.concatenate(chunks) if len(chunks) > 1 else chunks[0]
            chunks = [chain]
            v_hat = estimate_lrv(chain, method, rule=rule).value if np.ptp(chain) > 0 else 0.0
            checks += 1
            if fixed_width_should_stop(StoppingState(n, v_hat, epsilon, alpha, n_dagger)):
                return MonitorResult(n, float(chain.mean()), half_width(v_hat, n, alpha), v_hat, True, False,
                                     checks, method)
        if short:
            mean = float(np.concatenate(chunks).mean()) if n else math.nan
            hw = half_width(v_hat, n, alpha) if n and math.isfinite(v_hat) else math.inf
            return MonitorResult(n, mean, hw, v_hat, False, True, checks, method)
