"""
Parametric coloring models.

A coloring model supplies model autocovariances gamma_k(theta) and the
derived quantities

    v(theta)       = sum_k gamma_k(theta)
    v_p(theta)     = sum_k |k|^p gamma_k(theta)
    M_{ell,K}(theta) = sum_k K(k/ell) gamma_k(theta)

that the postcoloring coefficient eta = v / M is built from.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg, optimize, signal

from .core import (
    AutocovTable,
    DegenerateSeriesError,
    KernelSpec,
    _bartlett,
    _truncated,
    as_multiseries,
    as_series,
    sample_autocov,
    sample_cross_autocovs,
)

__all__ = [
    "FitWarning",
    "ModelSummary",
    "ColoringModel",
    "AR1Model",
    "ARMA11Model",
    "MAModel",
    "ARModel",
    "VAR1Model",
    "fit_ar1",
    "fit_arma11",
    "fit_maq",
    "fit_arp",
    "fit_var1",
    "model_autocov",
    "model_lrv",
    "model_vp",
    "model_M",
    "model_from_dict",
]

logger = logging.getLogger(__name__)

CLAMP_EPS = 1e-6
TRUNCATION_TOL = 1e-14
_BLOCK = 1024
_MAX_LAGS = 50_000_000
WHITE_NOISE_LR = 5.991464547107979  # chi-square(2) 95% quantile


class FitWarning(UserWarning):
    """Issued when a model fit falls back to a simpler solution."""


def safe_ratio(num, den):
    """num / den with the convention x / 0 = 1."""
    if abs(den) < 1e-300:
        return 1.0
    return num / den


@dataclass(frozen=True)
class ModelSummary:
    v: float
    v_p: float
    kappa_p: float
    p: int


class ColoringModel:
    """
    Base class for scalar coloring models.

    Subclasses implement ``autocovs`` and may override the closed forms.
    """

    kind = "base"

    # populated by subclasses
    innovation_var: float

    @property
    def params(self) -> tuple:
        raise NotImplementedError

    def autocovs(self, max_lag: int) -> np.ndarray:
        """Model autocovariances gamma_0..gamma_max_lag."""
        raise NotImplementedError

    def autocov(self, k: int) -> float:
        return float(self.autocovs(abs(int(k)))[-1])

    def decay_rate(self) -> float:
        """Geometric decay rate of |gamma_k|; 0 for finite-memory models."""
        return 0.0

    def lrv(self) -> float:
        return self._truncated_sum(0)

    def vp(self, p: int) -> float:
        if p == 0:
            return self.lrv()
        return self._truncated_sum(p)

    def kappa(self, p: int = 1) -> float:
        """Dependence ratio kappa_p = v_p / v."""
        return safe_ratio(self.vp(p), self.lrv())

    def summary(self, p: int = 1) -> ModelSummary:
        v = self.lrv()
        vp = self.vp(p)
        return ModelSummary(v, vp, safe_ratio(vp, v), p)

    def M(self, kernel: KernelSpec, ell: float) -> float:
        """Kernel-weighted autocovariance sum M_{ell,K}."""
        if ell < 1:
            raise ValueError(f"bandwidth must be >= 1, got {ell}")
        if math.isfinite(kernel.support):
            lim = kernel.lag_limit(ell)
            gam = self.autocovs(lim)
            w = kernel.weights(ell, lim)
            return float(gam[0] * w[0] + 2.0 * (w[1:] @ gam[1:]))
        return self._truncated_sum(0, weight=lambda k: kernel(k / ell))

    def eta(self, kernel: KernelSpec, ell: float) -> float:
        """Postcoloring coefficient v / M_{ell,K}."""
        return safe_ratio(self.lrv(), self.M(kernel, ell))

    def spectrum(self, omega) -> np.ndarray:
        """sum_k gamma_k cos(k omega), i.e. 2 pi times the spectral density."""
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        out = np.zeros_like(omega)
        for i, w in enumerate(omega):
            out[i] = self._truncated_sum(0, weight=lambda k, w=w: np.cos(k * w))
        return out

    def _truncated_sum(self, p: int, weight=None) -> float:
        """sum_k |k|^p w(k) gamma_k, truncated once |gamma_k| < tol * gamma_0."""
        g0 = self.autocovs(0)[0]
        scale = max(abs(g0), 1e-300)
        total = 0.0
        if p == 0:
            total = g0 if weight is None else g0 * float(weight(np.array([0.0]))[0])
        start = 1
        while start < _MAX_LAGS:
            stop = start + _BLOCK
            gam = self.autocovs(stop - 1)[start:stop]
            k = np.arange(start, stop, dtype=float)
            term = gam * k**p
            if weight is not None:
                term = term * weight(k)
            total += 2.0 * term.sum()
            if np.max(np.abs(gam)) * max(k[-1] ** p, 1.0) < TRUNCATION_TOL * scale:
                break
            start = stop
        return float(total)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": list(self.params), "innovation_var": self.innovation_var}


def _as_float(x) -> float:
    return float(np.asarray(x, dtype=float))


class AR1Model(ColoringModel):
    """
    AR(1) coloring model X_i = phi X_{i-1} + Z_i with Var(Z_i) = sigma2.
    """

    kind = "AR1"

    def __init__(self, phi: float, innovation_var: float = 1.0):
        phi = _as_float(phi)
        if not abs(phi) < 1.0:
            raise ValueError(f"AR(1) requires |phi| < 1, got {phi}")
        if not innovation_var > 0:
            raise ValueError("innovation variance must be positive")
        self.phi = phi
        self.innovation_var = float(innovation_var)

    def __repr__(self):
        return f"AR1Model(phi={self.phi!r}, innovation_var={self.innovation_var!r})"

    @property
    def params(self):
        return (self.phi,)

    def decay_rate(self):
        return abs(self.phi)

    def autocovs(self, max_lag):
        g0 = self.innovation_var / (1.0 - self.phi**2)
        return g0 * np.power(self.phi, np.arange(max_lag + 1, dtype=float))

    def lrv(self):
        return self.innovation_var / (1.0 - self.phi) ** 2

    def vp(self, p):
        phi, s2 = self.phi, self.innovation_var
        if p == 0:
            return self.lrv()
        if p == 1:
            return 2.0 * s2 * phi / ((1.0 - phi) ** 3 * (1.0 + phi))
        return self._truncated_sum(p)

    def kappa(self, p=1):
        if p == 1:
            return 2.0 * self.phi / (1.0 - self.phi**2)
        return super().kappa(p)

    def _closed_eta(self, kernel, ell):
        if float(ell) != int(ell):
            return None
        ell = int(ell)
        phi = self.phi
        if kernel.evaluator is _bartlett:
            if ell == 1:
                return (1.0 + phi) / (1.0 - phi)
            return ell * (1.0 - phi**2) / (2.0 * phi ** (ell + 1) - 2.0 * phi - ell * phi**2 + ell)
        if kernel.evaluator is _truncated:
            # the truncated window is not PSD: M vanishes at e.g. phi = -1/2, ell = 1
            return safe_ratio(1.0 + phi, 1.0 + phi - 2.0 * phi ** (ell + 1))
        return None

    def eta(self, kernel, ell):
        if ell < 1:
            raise ValueError(f"bandwidth must be >= 1, got {ell}")
        eta = self._closed_eta(kernel, ell)
        if eta is not None:
            return eta
        return super().eta(kernel, ell)

    def M(self, kernel, ell):
        if ell < 1:
            raise ValueError(f"bandwidth must be >= 1, got {ell}")
        if kernel.evaluator is _truncated and float(ell) == int(ell):
            phi = self.phi
            return self.innovation_var * (1.0 + phi - 2.0 * phi ** (int(ell) + 1)) / ((1.0 - phi) * (1.0 - phi**2))
        eta = self._closed_eta(kernel, ell)
        if eta is not None:
            return self.lrv() / eta
        return super().M(kernel, ell)

    def spectrum(self, omega):
        omega = np.asarray(omega, dtype=float)
        return self.innovation_var / (1.0 + self.phi**2 - 2.0 * self.phi * np.cos(omega))


class ARMA11Model(ColoringModel):
    """
    ARMA(1,1) model X_i = a X_{i-1} + e_i + b e_{i-1} with Var(e_i) = sigma2.
    """

    kind = "ARMA11"

    def __init__(self, a: float, b: float, innovation_var: float = 1.0):
        a, b = _as_float(a), _as_float(b)
        if not (abs(a) < 1.0 and abs(b) < 1.0):
            raise ValueError(f"ARMA(1,1) requires |a| < 1 and |b| < 1, got a={a}, b={b}")
        if not innovation_var > 0:
            raise ValueError("innovation variance must be positive")
        self.a, self.b = a, b
        self.innovation_var = float(innovation_var)

    def __repr__(self):
        return f"ARMA11Model(a={self.a!r}, b={self.b!r}, innovation_var={self.innovation_var!r})"

    @property
    def params(self):
        return (self.a, self.b)

    def decay_rate(self):
        return abs(self.a)

    def autocovs(self, max_lag):
        a, b, s2 = self.a, self.b, self.innovation_var
        out = np.empty(max_lag + 1)
        out[0] = (1.0 + b * b + 2.0 * a * b) * s2 / (1.0 - a * a)
        if max_lag >= 1:
            g1 = (a + b) * (1.0 + a * b) * s2 / (1.0 - a * a)
            out[1:] = g1 * np.power(a, np.arange(max_lag, dtype=float))
        return out

    def lrv(self):
        return self.innovation_var * (1.0 + self.b) ** 2 / (1.0 - self.a) ** 2

    def vp(self, p):
        if p == 0:
            return self.lrv()
        if p == 1:
            a, b, s2 = self.a, self.b, self.innovation_var
            g1 = (a + b) * (1.0 + a * b) * s2 / (1.0 - a * a)
            return 2.0 * g1 / (1.0 - a) ** 2
        return self._truncated_sum(p)

    def spectrum(self, omega):
        omega = np.asarray(omega, dtype=float)
        a, b = self.a, self.b
        c = np.cos(omega)
        return self.innovation_var * (1.0 + b * b + 2.0 * b * c) / (1.0 + a * a - 2.0 * a * c)


class MAModel(ColoringModel):
    """
    MA(q) model X_i = e_i + b_1 e_{i-1} + ... + b_q e_{i-q}.
    """

    kind = "MAq"

    def __init__(self, thetas, innovation_var: float = 1.0):
        self.thetas = tuple(float(t) for t in np.atleast_1d(thetas))
        if not innovation_var > 0:
            raise ValueError("innovation variance must be positive")
        self.innovation_var = float(innovation_var)
        psi = np.r_[1.0, self.thetas]
        q = len(self.thetas)
        self._gam = self.innovation_var * np.array([psi[: q + 1 - k] @ psi[k:] for k in range(q + 1)])

    def __repr__(self):
        return f"MAModel(thetas={self.thetas!r}, innovation_var={self.innovation_var!r})"

    @property
    def q(self):
        return len(self.thetas)

    @property
    def params(self):
        return self.thetas

    def autocovs(self, max_lag):
        out = np.zeros(max_lag + 1)
        m = min(max_lag, self.q)
        out[: m + 1] = self._gam[: m + 1]
        return out

    def lrv(self):
        return self.innovation_var * (1.0 + sum(self.thetas)) ** 2

    def vp(self, p):
        if p == 0:
            return self.lrv()
        k = np.arange(1, self.q + 1, dtype=float)
        return float(2.0 * (k**p) @ self._gam[1:])

    def M(self, kernel, ell):
        if ell < 1:
            raise ValueError(f"bandwidth must be >= 1, got {ell}")
        w = kernel.weights(ell, self.q)
        return float(self._gam[0] * w[0] + 2.0 * (w[1:] @ self._gam[1:]))

    def spectrum(self, omega):
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        psi = np.r_[1.0, self.thetas]
        z = np.exp(-1j * np.outer(omega, np.arange(self.q + 1)))
        return self.innovation_var * np.abs(z @ psi) ** 2


class ARModel(ColoringModel):
    """
    AR(p) model X_i = a_1 X_{i-1} + ... + a_p X_{i-p} + e_i.
    """

    kind = "ARp"

    def __init__(self, phis, innovation_var: float = 1.0):
        self.phis = tuple(float(t) for t in np.atleast_1d(phis))
        if not innovation_var > 0:
            raise ValueError("innovation variance must be positive")
        self.innovation_var = float(innovation_var)
        p = len(self.phis)
        comp = np.zeros((p, p))
        comp[0] = self.phis
        comp[1:, :-1] = np.eye(p - 1)
        self._rho = float(np.max(np.abs(np.linalg.eigvals(comp)))) if p else 0.0
        if self._rho >= 1.0:
            raise ValueError(f"AR({p}) coefficients are not stationary (spectral radius {self._rho:.6g})")
        self._head = self._initial_autocovs()
        self._cache = self._head

    def __repr__(self):
        return f"ARModel(phis={self.phis!r}, innovation_var={self.innovation_var!r})"

    @property
    def order(self):
        return len(self.phis)

    @property
    def params(self):
        return self.phis

    def decay_rate(self):
        return self._rho

    def _initial_autocovs(self):
        # gamma_k - sum_j a_j gamma_{|k-j|} = sigma2 1(k = 0), k = 0..p
        p = self.order
        a = np.array(self.phis)
        A = np.eye(p + 1)
        for k in range(p + 1):
            for j in range(1, p + 1):
                A[k, abs(k - j)] -= a[j - 1]
        rhs = np.zeros(p + 1)
        rhs[0] = self.innovation_var
        return np.linalg.solve(A, rhs)

    def autocovs(self, max_lag):
        if max_lag + 1 <= len(self._cache):
            return self._cache[: max_lag + 1].copy()
        p = self.order
        a = np.array(self.phis)
        out = np.empty(max_lag + 1)
        m = len(self._cache)
        out[:m] = self._cache
        for k in range(m, max_lag + 1):
            out[k] = a @ out[k - p : k][::-1]
        self._cache = out
        return out.copy()

    def lrv(self):
        return self.innovation_var / (1.0 - sum(self.phis)) ** 2

    def spectrum(self, omega):
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        poly = np.r_[1.0, -np.array(self.phis)]
        z = np.exp(-1j * np.outer(omega, np.arange(self.order + 1)))
        return self.innovation_var / np.abs(z @ poly) ** 2


class VAR1Model:
    """
    VAR(1) model X_i = Phi X_{i-1} + Z_i with Cov(Z_i) = Sigma.

    Autocovariances follow the sample convention
    Gamma_k = E[X_i X_{i-k}^T] = Phi^k Gamma_0 for k >= 0 and
    Gamma_{-k} = Gamma_k^T.
    """

    kind = "VAR1"

    def __init__(self, Phi, innovation_var):
        Phi = np.atleast_2d(np.asarray(Phi, dtype=float))
        Sigma = np.atleast_2d(np.asarray(innovation_var, dtype=float))
        d = Phi.shape[0]
        if Phi.shape != (d, d) or Sigma.shape != (d, d):
            raise ValueError("Phi and Sigma must be square matrices of the same size")
        rho = float(np.max(np.abs(np.linalg.eigvals(Phi))))
        if rho >= 1.0:
            raise ValueError(f"VAR(1) requires spectral radius < 1, got {rho:.6g}")
        self.Phi = Phi
        self.innovation_var = (Sigma + Sigma.T) / 2.0
        self.rho = rho
        g0 = linalg.solve_discrete_lyapunov(Phi, self.innovation_var)
        self.gamma0 = (g0 + g0.T) / 2.0

    def __repr__(self):
        return f"VAR1Model(Phi={self.Phi.tolist()!r}, innovation_var={self.innovation_var.tolist()!r})"

    @property
    def dim(self):
        return self.Phi.shape[0]

    @property
    def params(self):
        return self.Phi

    def autocovs(self, max_lag):
        d = self.dim
        out = np.empty((max_lag + 1, d, d))
        out[0] = self.gamma0
        for k in range(1, max_lag + 1):
            out[k] = self.Phi @ out[k - 1]
        return out

    def autocov(self, k):
        g = self.autocovs(abs(int(k)))[-1]
        return g if k >= 0 else g.T

    def lrv(self):
        psi = np.linalg.inv(np.eye(self.dim) - self.Phi)
        V = psi @ self.innovation_var @ psi.T
        return (V + V.T) / 2.0

    def vp(self, p):
        if p == 0:
            return self.lrv()
        if p == 1:
            eye = np.eye(self.dim)
            inv = np.linalg.inv(eye - self.Phi)
            half = self.Phi @ inv @ inv @ self.gamma0
            return half + half.T
        return self._truncated_matrix_sum(p)

    def _truncated_matrix_sum(self, p):
        d = self.dim
        total = np.zeros((d, d))
        scale = max(np.max(np.abs(self.gamma0)), 1e-300)
        g = self.gamma0.copy()
        k = 0
        while k < _MAX_LAGS:
            k += 1
            g = self.Phi @ g
            term = k**p * g
            total += term + term.T
            if np.max(np.abs(g)) * k**p < TRUNCATION_TOL * scale:
                break
        return total

    def M(self, kernel: KernelSpec, ell: float) -> np.ndarray:
        """Sum_k K(k/ell) Gamma_k."""
        if ell < 1:
            raise ValueError(f"bandwidth must be >= 1, got {ell}")
        lim = kernel.lag_limit(ell) if math.isfinite(kernel.support) else int(50 * ell)
        w = kernel.weights(ell, lim)
        total = w[0] * self.gamma0
        g = self.gamma0
        for k in range(1, lim + 1):
            g = self.Phi @ g
            if w[k] != 0.0:
                total = total + w[k] * (g + g.T)
        return total

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": self.Phi.tolist(), "innovation_var": self.innovation_var.tolist()}


# ---------------------------------------------------------------------------
# functional aliases


def model_autocov(m, k):
    """gamma_k(theta) for a scalar model or Gamma_k for VAR(1)."""
    return m.autocov(k)


def model_lrv(m):
    return m.lrv()


def model_vp(m, p):
    return m.vp(p)


def model_M(m, kernel, ell):
    return m.M(kernel, ell)


def model_from_dict(obj: dict):
    """Rebuild a model from its ``{kind, params, innovation_var}`` record."""
    kind = obj["kind"]
    params = obj.get("params", [])
    s2 = obj.get("innovation_var", 1.0)
    if kind == "AR1":
        return AR1Model(params[0], s2)
    if kind == "ARMA11":
        return ARMA11Model(params[0], params[1], s2)
    if kind == "MAq":
        return MAModel(params, s2)
    if kind == "ARp":
        return ARModel(params, s2)
    if kind == "VAR1":
        return VAR1Model(params, s2)
    raise ValueError(f"unknown model kind {kind!r}")


# ---------------------------------------------------------------------------
# fitting


def _clamp(phi, eps):
    bound = 1.0 - eps
    return min(max(phi, -bound), bound)


def fit_ar1(acf, eps: float = CLAMP_EPS) -> AR1Model:
    """
    Lag-one moment fit of an AR(1) model.

    Parameters
    ----------
    acf : AutocovTable or array_like
        Sample autocovariances, or the series itself.
    eps : float
        phi is clamped to [-1 + eps, 1 - eps].

    Returns
    -------
    AR1Model
        phi = gamma~_1 / gamma~_0 and innovation variance chosen so the
        model variance equals gamma~_0.
    """
    if not isinstance(acf, AutocovTable):
        acf = sample_autocov(acf, max_lag=1)
    g0 = float(acf.gammas[0])
    if not g0 > 0:
        raise DegenerateSeriesError("series has zero sample variance")
    phi = _clamp(float(acf.gammas[1]) / g0, eps)
    return AR1Model(phi, g0 * (1.0 - phi**2))


def _arma11_css(params, y):
    a, b = params
    w = y[1:] - a * y[:-1]
    e = signal.lfilter([1.0], [1.0, b], w)
    # derivatives of e with respect to a and b through the same recursion
    da = signal.lfilter([1.0], [1.0, b], -y[:-1])
    de_lag = np.r_[0.0, e[:-1]]
    db = signal.lfilter([1.0], [1.0, b], -de_lag)
    return e @ e, np.array([2.0 * e @ da, 2.0 * e @ db])


def fit_arma11(x, eps: float = CLAMP_EPS, maxiter: int = 200) -> ARMA11Model:
    """
    Conditional-sum-of-squares fit of an ARMA(1,1) model.

    Residuals are e_t = y_t - a y_{t-1} - b e_{t-1} for t >= 2 with e_1 = 0
    and y the demeaned series. The search is restricted to the box
    (-1 + eps, 1 - eps)^2 and started at (gamma~_1 / gamma~_0, 0).

    If the optimizer fails the AR(1)-equivalent solution (phi, 0) is
    returned and a :class:`FitWarning` is issued. White noise lies on the
    unidentified ridge a = -b, so the fit returns (0, 0) unless
    (n - 1) log(SSE_0 / SSE) exceeds the 95% chi-square(2) quantile, with
    SSE_0 the white-noise sum of squares.
    """
    x = as_series(x, min_length=10)
    y = x - x.mean()
    acf = sample_autocov(y, max_lag=1)
    if not acf.gammas[0] > 0:
        raise DegenerateSeriesError("series has zero sample variance")
    phi = _clamp(acf.gammas[1] / acf.gammas[0], eps)
    bound = 1.0 - eps
    scale = acf.gammas[0]
    res = optimize.minimize(
        lambda p: tuple(v / scale for v in _arma11_css(p, y)),
        x0=np.array([phi, 0.0]),
        jac=True,
        method="L-BFGS-B",
        bounds=[(-bound, bound), (-bound, bound)],
        options={"maxiter": maxiter},
    )
    if res.success and np.all(np.isfinite(res.x)):
        a, b = (float(v) for v in np.clip(res.x, -bound, bound))
        sse = _arma11_css((a, b), y)[0]
    else:
        warnings.warn(f"ARMA(1,1) fit did not converge ({res.message}); using AR(1) solution", FitWarning, stacklevel=2)
        a, b = phi, 0.0
        sse = _arma11_css((a, b), y)[0]
    # a = -b is a common-factor ridge along which white noise is unidentified;
    # keep (0, 0) unless the fit beats white noise by a 5% likelihood-ratio test
    sse0 = float(y[1:] @ y[1:])
    if (a, b) != (0.0, 0.0) and (len(y) - 1) * math.log(sse0 / max(sse, 1e-300)) < WHITE_NOISE_LR:
        a, b, sse = 0.0, 0.0, sse0
    s2 = max(sse / (len(y) - 1), 1e-300)
    return ARMA11Model(a, b, s2)


def _innovations_ma(gam: np.ndarray, q: int, tol: float = 1e-12, max_iter: int = 5000):
    """
    Innovations recursion on an MA(q) autocovariance sequence.

    Returns (thetas, sigma2, converged). The recursion only touches the
    last q coefficients because theta_{m,j} vanishes for j > q.
    """
    v = [gam[0]]
    thetas = [np.zeros(q)]  # thetas[m][i-1] = theta_{m,i}
    prev = np.zeros(q)
    for m in range(1, max_iter + 1):
        th = np.zeros(q)
        lo = max(0, m - q)
        for k in range(lo, m):
            i = m - k
            acc = gam[i]
            for j in range(max(0, k - q), k):
                # theta_{k,k-j} theta_{m,m-j} v_j
                if j >= lo:
                    acc -= thetas[k][k - j - 1] * th[m - j - 1] * v[j]
            th[i - 1] = acc / v[k]
        vm = gam[0] - sum(th[m - j - 1] ** 2 * v[j] for j in range(lo, m))
        if not vm > 0:
            return None, None, False
        thetas.append(th)
        v.append(vm)
        if m > q and np.max(np.abs(th - prev)) < tol:
            return th, vm, True
        prev = th
    return th, vm, False


def _ma_factor(gam: np.ndarray, q: int, tol: float = 1e-7):
    """
    Spectral factorization of an MA(q) autocovariance sequence.

    Returns (thetas, sigma2) for the invertible MA(q) whose autocovariances
    equal ``gam``, or None when the sequence is not positive definite (roots
    of the autocovariance generating function on the unit circle).
    """
    while q > 0 and gam[q] == 0.0:
        q -= 1
    if q == 0:
        return np.zeros(0), float(gam[0])
    coeffs = np.r_[gam[q:0:-1], gam[: q + 1]]
    roots = np.roots(coeffs)
    outside = roots[np.abs(roots) > 1.0 + tol]
    if len(outside) != q:
        return None
    poly = np.real(np.poly(outside))[::-1]
    thetas = poly / poly[0]
    sigma2 = float(gam[0] / (thetas @ thetas))
    return thetas[1:], sigma2


def fit_maq(x, q: int, min_spectrum: float = 1e-2) -> MAModel:
    """
    Moment-matching MA(q) fit.

    The fitted model reproduces gamma~_0..gamma~_q exactly. It is obtained
    by spectral factorization of the sample autocovariance generating
    function, which is the fixed point of the innovations recursion run on
    those moments. When the sample moments are not a valid MA(q)
    autocovariance (their cosine transform dips below zero), lags 1..q are
    shrunk toward zero just enough that the minimum of the implied spectrum
    equals ``min_spectrum * gamma~_0``.
    """
    x = as_series(x, min_length=q + 2)
    gam = sample_autocov(x, max_lag=q).gammas.copy()
    if not gam[0] > 0:
        raise DegenerateSeriesError("series has zero sample variance")
    omega = np.linspace(0.0, np.pi, 1025)
    k = np.arange(1, q + 1)
    dens = gam[0] + 2.0 * np.cos(np.outer(omega, k)) @ gam[1:]
    smin = float(dens.min())
    target = min_spectrum * gam[0]
    if smin < target:
        lam = (gam[0] - target) / (gam[0] - smin)
        gam[1:] *= lam
        warnings.warn(f"MA({q}) moments shrunk by {lam:.3g} to obtain a valid fit", FitWarning, stacklevel=2)
    for _ in range(50):
        out = _ma_factor(gam, q)
        if out is not None:
            th, s2 = out
            return MAModel(np.r_[th, np.zeros(q - len(th))], s2)
        gam[1:] *= 0.9
    warnings.warn(f"MA({q}) fit failed; using white noise", FitWarning, stacklevel=2)
    return MAModel(np.zeros(q), gam[0])


def fit_arp(x, p: int) -> ARModel:
    """Yule-Walker AR(p) fit from the biased sample autocovariances."""
    x = as_series(x, min_length=p + 2)
    acf = sample_autocov(x, max_lag=p)
    g = acf.gammas
    if not g[0] > 0:
        raise DegenerateSeriesError("series has zero sample variance")
    phis = linalg.solve_toeplitz(g[:p], g[1 : p + 1])
    s2 = float(g[0] - phis @ g[1 : p + 1])
    return ARModel(phis, max(s2, 1e-300))


def fit_var1(x, eps: float = CLAMP_EPS) -> VAR1Model:
    """
    Yule-Walker VAR(1) fit.

    Phi = Gamma~_1 Gamma~_0^{-1}, so the residuals are
    Z_i = X_i - X_{i-1} Phi^T. The residual covariance uses divisor n - 1
    over the n - 1 residuals. If the spectral radius of Phi reaches
    1 - eps, Phi is rescaled to radius 1 - eps.
    """
    x = as_multiseries(x, min_length=3)
    gam = sample_cross_autocovs(x, 1)
    g0, g1 = gam[0], gam[1]
    if np.linalg.cond(g0) > 1e14:
        raise np.linalg.LinAlgError("sample covariance matrix is singular")
    Phi = np.linalg.solve(g0.T, g1.T).T
    rho = float(np.max(np.abs(np.linalg.eigvals(Phi))))
    if rho >= 1.0 - eps:
        Phi = Phi * (1.0 - eps) / rho
    z = x[1:] - x[:-1] @ Phi.T
    zc = z - z.mean(0)
    Sigma = zc.T @ zc / z.shape[0]
    return VAR1Model(Phi, Sigma)


def var1_residuals(x, model: VAR1Model) -> np.ndarray:
    """Z_i = X_i - X_{i-1} Phi^T for i = 2..n."""
    x = as_multiseries(x)
    return x[1:] - x[:-1] @ model.Phi.T
