"""
Scalar long-run variance estimators.

All estimators share the kernel estimator

    v~(ell; K) = sum_{|k| < n} K(k / ell) gamma~_k

and differ in how the neglected tail sum_{|k| >= ell} gamma_k is handled:
ignored (unadjusted), undone by recoloring a prewhitened series, or
restored multiplicatively by the postcoloring coefficient
eta = v(theta) / M_{ell,K}(theta) of a fitted parametric model.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import KernelSpec, as_series, bartlett_kernel, sample_autocov
from .models import CLAMP_EPS, AR1Model, ColoringModel, fit_ar1, safe_ratio

__all__ = [
    "LrvEstimate",
    "WeightScheme",
    "kernel_sum",
    "lrv_unadjusted",
    "lrv_parametric_ar1",
    "lrv_prewhitened_ar1",
    "lrv_tail_postcolored",
    "lrv_tail_postcolored_general",
    "lrv_tail_finite_sample",
    "lrv_multi_model",
    "adaptive_weights",
    "prewhiten_ar1",
]


@dataclass
class LrvEstimate:
    """
    Scalar LRV estimate together with the bandwidth, coefficient and model behind it.

    Attributes
    ----------
    value : float
        The estimate.
    ell : int
        Bandwidth used for the kernel part (0 for purely parametric).
    eta : float
        Multiplicative coefficient applied to the kernel estimate; 1 for
        the unadjusted estimator.
    method : str
        Short tag (``un``, ``para``, ``pw``, ``tail`` ...).
    kernel : str, optional
        Kernel name.
    model : object, optional
        Coloring model used, if any.
    extra : dict
        Method-specific details such as multi-model weights.
    """

    value: float
    ell: int
    eta: float
    method: str
    kernel: str | None = None
    model: object = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"value": float(self.value), "ell": int(self.ell), "eta": float(self.eta), "method": self.method}
        if self.kernel is not None:
            out["kernel"] = self.kernel
        if self.model is not None and hasattr(self.model, "to_dict"):
            out["model"] = self.model.to_dict()
        for key, val in self.extra.items():
            out[key] = val.tolist() if isinstance(val, np.ndarray) else val
        return out


@dataclass(frozen=True)
class WeightScheme:
    """
    Combination rule for the multi-model estimator.

    ``kind`` is ``"adaptive"`` (weights proportional to |xi_j|^-2),
    ``"simple_average"`` or ``"fixed"`` (use ``weights`` as given).
    """

    kind: str = "adaptive"
    weights: tuple | None = None


def _check_ell(ell, n, upper=None):
    upper = n - 1 if upper is None else upper
    if int(ell) != ell:
        raise ValueError(f"bandwidth must be an integer, got {ell}")
    if not 1 <= ell <= upper:
        raise ValueError(f"bandwidth must satisfy 1 <= ell <= {upper}, got {ell}")
    return int(ell)


def kernel_sum(gammas: np.ndarray, kernel: KernelSpec, ell: float, power: int = 0) -> float:
    """
    sum_{|k| < L} K(k / ell) |k|^power gamma_k from one-sided autocovariances.

    ``gammas`` holds gamma_0, gamma_1, ...; lags beyond the kernel support or
    beyond the array are dropped.
    """
    lim = min(kernel.lag_limit(ell), len(gammas) - 1)
    w = kernel.weights(ell, lim)
    g = gammas[: lim + 1]
    if power == 0:
        return float(w[0] * g[0] + 2.0 * (w[1:] @ g[1:]))
    k = np.arange(1, lim + 1, dtype=float) ** power
    return float(2.0 * ((w[1:] * k) @ g[1:]))


def lrv_unadjusted(x, kernel: KernelSpec | None = None, ell: int = 1, acf=None) -> LrvEstimate:
    """
    Kernel (lag-window) LRV estimator.

    Parameters
    ----------
    x : array_like
        Series of length n.
    kernel : KernelSpec, optional
        Lag window, Bartlett by default.
    ell : int
        Bandwidth, 1 <= ell < n.
    acf : AutocovTable, optional
        Precomputed autocovariances covering the kernel support.
    """
    kernel = kernel or bartlett_kernel()
    x = as_series(x)
    n = x.shape[0]
    ell = _check_ell(ell, n)
    lim = kernel.lag_limit(ell, n)
    if acf is None or acf.max_lag < lim:
        acf = sample_autocov(x, max_lag=lim)
    value = kernel_sum(acf.gammas, kernel, ell)
    return LrvEstimate(value, ell, 1.0, "un", kernel.name)


def prewhiten_ar1(x, clamp: float = 1.0 - CLAMP_EPS):
    """
    AR(1) prewhitening.

    Returns ``(z, phi)`` with phi = gamma~_1 / gamma~_0 clamped to
    [-clamp, clamp] and z_i = x_i - phi x_{i-1} for i = 2..n.
    """
    x = as_series(x, min_length=3)
    phi = fit_ar1(sample_autocov(x, max_lag=1)).phi
    phi = min(max(phi, -clamp), clamp)
    return x[1:] - phi * x[:-1], phi


def lrv_parametric_ar1(x) -> LrvEstimate:
    """
    AR(1) parametric estimator sigma_z^2 / (1 - phi)^2.

    sigma_z^2 is the variance of the AR(1) residuals with divisor n - 2.
    """
    x = as_series(x, min_length=3)
    z, phi = prewhiten_ar1(x)
    zc = z - z.mean()
    s2 = (zc @ zc) / (x.shape[0] - 2)
    return LrvEstimate(s2 / (1.0 - phi) ** 2, 0, 1.0, "para", None, AR1Model(phi, max(s2, 1e-300)))


def lrv_prewhitened_ar1(x, kernel: KernelSpec | None = None, ell: int = 1, clamp: float = 0.97) -> LrvEstimate:
    """
    AR(1)-prewhitened kernel estimator.

    v_pw = v~(ell; K; Z_{2:n}) / (1 - phi)^2 with phi clamped to
    [-clamp, clamp]. The kernel estimate on Z uses Z's own mean.

    Parameters
    ----------
    clamp : float
        Bound on |phi| in (0, 1]. The classical choice is 0.97.
    """
    kernel = kernel or bartlett_kernel()
    x = as_series(x)
    n = x.shape[0]
    if n < 4:
        raise ValueError("prewhitening needs at least 4 observations")
    if not 0.0 < clamp <= 1.0:
        raise ValueError(f"clamp must lie in (0, 1], got {clamp}")
    ell = _check_ell(ell, n, upper=n - 2)
    z, phi = prewhiten_ar1(x, clamp=min(clamp, 1.0 - CLAMP_EPS))
    vz = lrv_unadjusted(z, kernel, ell).value
    eta = 1.0 / (1.0 - phi) ** 2
    return LrvEstimate(eta * vz, ell, eta, "pw", kernel.name, AR1Model(phi, 1.0), {"phi": phi})


def _resolve_model(x, model):
    if model is None:
        return fit_ar1(sample_autocov(x, max_lag=1))
    return model


def lrv_tail_postcolored(x, kernel: KernelSpec | None = None, ell: int = 1, model: ColoringModel | None = None,
                         acf=None) -> LrvEstimate:
    """
    Tail-postcolored LRV estimator eta * v~(ell; K).

    Parameters
    ----------
    x : array_like
        Series of length n.
    kernel : KernelSpec, optional
        Lag window, Bartlett by default.
    ell : int
        Bandwidth, 1 <= ell < n.
    model : ColoringModel, optional
        Fitted coloring model; an AR(1) moment fit by default.
    acf : AutocovTable, optional
        Precomputed autocovariances.

    Notes
    -----
    eta = v(theta) / M_{ell,K}(theta) with the convention x / 0 = 1.
    """
    kernel = kernel or bartlett_kernel()
    x = as_series(x)
    model = _resolve_model(x, model)
    base = lrv_unadjusted(x, kernel, ell, acf=acf)
    eta = model.eta(kernel, base.ell)
    return LrvEstimate(eta * base.value, base.ell, eta, "tail", kernel.name, model)


def lrv_tail_postcolored_general(x, kernel_K: KernelSpec | None = None, kernel_H: KernelSpec | None = None,
                                 ell: int = 1, model: ColoringModel | None = None, acf=None) -> LrvEstimate:
    """
    Two-kernel tail-postcolored estimator {v(theta) / M_{ell,H}(theta)} v~(ell; K).

    With ``kernel_H`` equal to ``kernel_K`` this is exactly
    :func:`lrv_tail_postcolored`.
    """
    kernel_K = kernel_K or bartlett_kernel()
    kernel_H = kernel_H or kernel_K
    x = as_series(x)
    model = _resolve_model(x, model)
    base = lrv_unadjusted(x, kernel_K, ell, acf=acf)
    eta = model.eta(kernel_H, base.ell)
    return LrvEstimate(eta * base.value, base.ell, eta, "tail-general", kernel_K.name, model,
                       {"kernel_H": kernel_H.name})


def lrv_tail_finite_sample(x, kernel: KernelSpec | None = None, ell: int = 1, model: ColoringModel | None = None,
                           acf=None) -> LrvEstimate:
    """
    Tail-postcolored estimator of the finite-sample target Var(sqrt(n) Xbar).

    The coefficient is v^fs(theta) / M_{ell,K}(theta) with
    v^fs = sum_{|k| < n} (1 - |k|/n) gamma_k(theta).
    """
    kernel = kernel or bartlett_kernel()
    x = as_series(x)
    n = x.shape[0]
    model = _resolve_model(x, model)
    base = lrv_unadjusted(x, kernel, ell, acf=acf)
    v_fs = model.M(bartlett_kernel(), n)
    eta = safe_ratio(v_fs, model.M(kernel, base.ell))
    return LrvEstimate(eta * base.value, base.ell, eta, "tail-fs", kernel.name, model)


def adaptive_weights(xis: Sequence[float], tie_tol: float = 1e-12) -> np.ndarray:
    """
    Weights proportional to |xi_j|^-2.

    If some |xi_j| < tie_tol, those models share the whole weight equally.
    """
    xis = np.abs(np.asarray(xis, dtype=float))
    if xis.size == 0:
        raise ValueError("need at least one model")
    ties = xis < tie_tol
    if ties.any():
        return ties / ties.sum()
    inv = xis**-2.0
    return inv / inv.sum()


def lrv_multi_model(x, kernel: KernelSpec | None = None, models: Sequence[ColoringModel] = (),
                    bandwidths: Sequence[int] | None = None, scheme: WeightScheme | str = "adaptive",
                    xis: Sequence[float] | None = None) -> LrvEstimate:
    """
    Multi-model tail-postcolored estimator sum_j w_j v_tail^[j].

    Parameters
    ----------
    x : array_like
        Series.
    kernel : KernelSpec, optional
        Lag window, Bartlett by default.
    models : sequence of ColoringModel
        Fitted coloring models.
    bandwidths : sequence of int, optional
        Bandwidth per model. By default each model gets its own plug-in
        ell_tail,j from the nonparametric xi estimate.
    scheme : WeightScheme or str
        ``"adaptive"``, ``"simple_average"``, or a WeightScheme with fixed
        weights.
    xis : sequence of float, optional
        Mismatch estimates xi_j used by the adaptive weights; computed from
        the nonparametric pilot estimate when omitted.
    """
    from .bandwidth import ell_tail, kappa_nonparametric

    kernel = kernel or bartlett_kernel()
    x = as_series(x)
    n = x.shape[0]
    models = list(models)
    if not models:
        raise ValueError("need at least one coloring model")
    if isinstance(scheme, str):
        scheme = WeightScheme(scheme)
    if bandwidths is not None and len(bandwidths) != len(models):
        raise ValueError("models and bandwidths must have equal length")
    if xis is not None and len(xis) != len(models):
        raise ValueError("models and xis must have equal length")
    need_xi = xis is None and (bandwidths is None or scheme.kind == "adaptive")
    if need_xi:
        kap = kappa_nonparametric(x).kappa
        xis = [kap - m.kappa(1) for m in models]
    if bandwidths is None:
        bandwidths = [ell_tail(xi, kernel, n) for xi in xis]
    lim = max(kernel.lag_limit(ell, n) for ell in bandwidths)
    acf = sample_autocov(x, max_lag=lim)
    parts = [lrv_tail_postcolored(x, kernel, ell, m, acf=acf) for m, ell in zip(models, bandwidths)]
    if scheme.kind == "adaptive":
        w = adaptive_weights(xis)
    elif scheme.kind == "simple_average":
        w = np.full(len(models), 1.0 / len(models))
    elif scheme.kind == "fixed":
        w = np.asarray(scheme.weights, dtype=float)
        if w.shape != (len(models),) or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("fixed weights must be nonnegative and sum to one")
    else:
        raise ValueError(f"unknown weight scheme {scheme.kind!r}")
    values = np.array([p.value for p in parts])
    value = float(w @ values)
    eta = float(w @ np.array([p.eta for p in parts]))
    return LrvEstimate(value, max(bandwidths), eta, "multi", kernel.name, None,
                       {"weights": w, "components": values, "bandwidths": [int(b) for b in bandwidths]})
