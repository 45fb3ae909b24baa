"""
Bandwidth selection and asymptotic MSE analysis.

For a kernel of order p with constants A and B the MSE-optimal bandwidth of
a tail-postcolored estimator is

    ell_tail ~ {p B^2 xi_p^2 n / (2A)}^{1/(2p+1)},   xi_p = kappa_p - kappa_p(theta*),

where kappa_p = v_p / v is the dependence ratio of the data and
kappa_p(theta*) that of the coloring model. The unadjusted estimator is the
special case kappa_p(theta*) = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import KernelSpec, as_series, bartlett_kernel, sample_autocov
from .estimators import kernel_sum, prewhiten_ar1
from .models import ARMA11Model, ColoringModel, fit_ar1, fit_arma11

__all__ = [
    "XiEstimate",
    "PilotEstimate",
    "AsymptoticProfile",
    "pilot_bandwidth",
    "kappa_nonparametric",
    "xi1_parametric",
    "xi1_nonparametric",
    "ell_tail",
    "ell_andrews_ar1",
    "ell_andrews_from_series",
    "ell_unadjusted_nonparametric",
    "asymptotic_profile",
    "improvement_region_ar1",
    "arma11_improvement_table",
]


@dataclass(frozen=True)
class XiEstimate:
    """Estimate of the mismatch xi_p = kappa_p - kappa_p(theta*)."""

    xi: float
    p: int = 1
    method: str = "nonparametric"
    kappa: float | None = None
    kappa_model: float | None = None
    degenerate: bool = False

    def __float__(self):
        return float(self.xi)


@dataclass(frozen=True)
class PilotEstimate:
    """Pilot kernel sums v~_{0,#}, v~_{1,#} and their ratio."""

    v0: float
    v1: float
    kappa: float
    ell0: int
    ell1: int
    degenerate: bool = False


@dataclass(frozen=True)
class AsymptoticProfile:
    """
    Leading-order MSE, bias and variance of an optimally tuned estimator.

    ``mse_n23`` is lim n^{2p/(2p+1)} MSE / v^2 (n^{2/3} for p = 1),
    ``bias_n13`` the matching signed bias / v and ``var_n23`` the variance
    share. ``mse_n23 = bias_n13**2 + var_n23``.
    """

    mse_n23: float
    bias_n13: float
    var_n23: float
    xi: float


def pilot_bandwidth(n: int, r: int) -> int:
    """Pilot bandwidth ceil(2 n^{1/(2r+3)})."""
    return int(math.ceil(2.0 * n ** (1.0 / (2 * r + 3))))


def _finite_order(kernel):
    if not kernel.finite_order:
        raise ValueError(f"kernel {kernel.name!r} has infinite order; bandwidth formulas need finite p")
    return kernel.order_p


def kappa_nonparametric(x, pilot_kernel: KernelSpec | None = None, acf=None) -> PilotEstimate:
    """
    Nonparametric dependence ratio kappa~_1 = v~_{1,#} / v~_{0,#}.

    v~_{r,#} = sum_k K(k / ell_r) |k|^r gamma~_k with pilot bandwidths
    ell_r = ceil(2 n^{1/(2r+3)}).
    """
    pilot_kernel = pilot_kernel or bartlett_kernel()
    x = as_series(x)
    n = x.shape[0]
    ell0, ell1 = min(pilot_bandwidth(n, 0), n - 1), min(pilot_bandwidth(n, 1), n - 1)
    lim = max(pilot_kernel.lag_limit(ell0, n), pilot_kernel.lag_limit(ell1, n))
    if acf is None or acf.max_lag < lim:
        acf = sample_autocov(x, max_lag=lim)
    v0 = kernel_sum(acf.gammas, pilot_kernel, ell0)
    v1 = kernel_sum(acf.gammas, pilot_kernel, ell1, power=1)
    if not v0 > 0:
        return PilotEstimate(v0, v1, 0.0, ell0, ell1, True)
    return PilotEstimate(v0, v1, v1 / v0, ell0, ell1)


def xi1_nonparametric(x, pilot_kernel: KernelSpec | None = None, model: ColoringModel | None = None,
                      acf=None) -> XiEstimate:
    """
    Nonparametric plug-in xi_1 = v~_{1,#} / v~_{0,#} - kappa_1(theta_bar).

    Parameters
    ----------
    x : array_like
        Series.
    pilot_kernel : KernelSpec, optional
        Kernel for both pilot sums, Bartlett by default.
    model : ColoringModel, optional
        Coloring model; AR(1) moment fit by default, for which
        kappa_1 = 2 phi / (1 - phi^2).
    """
    x = as_series(x)
    if acf is None:
        n = x.shape[0]
        acf = sample_autocov(x, max_lag=min(n - 1, pilot_bandwidth(n, 0)))
    pilot = kappa_nonparametric(x, pilot_kernel, acf=acf)
    if model is None:
        model = fit_ar1(acf)
    kmod = model.kappa(1)
    if pilot.degenerate:
        return XiEstimate(0.0, 1, "nonparametric", pilot.kappa, kmod, True)
    return XiEstimate(pilot.kappa - kmod, 1, "nonparametric", pilot.kappa, kmod)


def xi1_parametric(x, arma: ARMA11Model | None = None) -> XiEstimate:
    """
    Parametric plug-in xi_1 from an ARMA(1,1) fit.

    xi_1 = 2(a+b)(1+ab) / {(1+b)^2 (1-a^2)} - 2 phi / (1 - phi^2), the
    difference between the ARMA(1,1) and AR(1) dependence ratios.
    """
    x = as_series(x, min_length=10)
    if arma is None:
        arma = fit_arma11(x)
    a, b = arma.a, arma.b
    k_arma = 2.0 * (a + b) * (1.0 + a * b) / ((1.0 + b) ** 2 * (1.0 - a * a))
    k_ar1 = fit_ar1(x).kappa(1)
    return XiEstimate(k_arma - k_ar1, 1, "parametric", k_arma, k_ar1)


def _clamp_ell(value: float, n: int, upper: int | None = None) -> int:
    upper = n - 1 if upper is None else upper
    if not math.isfinite(value):
        return max(upper, 1)
    return int(min(max(math.ceil(value), 1), max(upper, 1)))


def ell_tail(xi, kernel: KernelSpec | None = None, n: int = 2, upper: int | None = None) -> int:
    """
    MSE-optimal bandwidth ceil({p B^2 xi^2 n / (2A)}^{1/(2p+1)}) clamped to [1, n-1].

    For the Bartlett kernel this is ceil((3 xi^2 n / 2)^{1/3}).
    """
    kernel = kernel or bartlett_kernel()
    p = _finite_order(kernel)
    xi = float(xi)
    if not n >= 2:
        raise ValueError("n must be at least 2")
    base = p * kernel.const_B**2 * xi * xi * n / (2.0 * kernel.const_A)
    return _clamp_ell(base ** (1.0 / (2.0 * p + 1.0)), n, upper)


def ell_andrews_ar1(phi: float, n: int, upper: int | None = None) -> int:
    """AR(1) plug-in bandwidth ceil({6 phi^2 n / (1 - phi^2)^2}^{1/3})."""
    if not n >= 2:
        raise ValueError("n must be at least 2")
    phi = float(phi)
    if abs(phi) >= 1.0:
        return _clamp_ell(math.inf, n, upper)
    return _clamp_ell((6.0 * phi * phi * n / (1.0 - phi * phi) ** 2) ** (1.0 / 3.0), n, upper)


def ell_andrews_from_series(x, prewhitened: bool = False, clamp: float = 0.97) -> int:
    """
    Andrews AR(1) plug-in bandwidth computed from data.

    With ``prewhitened=True`` the formula is applied to the lag-one
    autocorrelation of the AR(1)-prewhitened series, for use with the
    prewhitened estimator.
    """
    x = as_series(x, min_length=3)
    n = x.shape[0]
    if prewhitened:
        z, _ = prewhiten_ar1(x, clamp=clamp)
        phi_z = fit_ar1(z).phi
        return ell_andrews_ar1(phi_z, n, upper=n - 2)
    return ell_andrews_ar1(fit_ar1(x).phi, n)


def ell_unadjusted_nonparametric(x, kernel: KernelSpec | None = None, acf=None) -> int:
    """Nonparametric plug-in bandwidth for the unadjusted estimator, xi = kappa~_1."""
    x = as_series(x)
    pilot = kappa_nonparametric(x, acf=acf)
    return ell_tail(pilot.kappa, kernel, x.shape[0])


def asymptotic_profile(kappa1: float, kappa1_model: float = 0.0, kernel: KernelSpec | None = None) -> AsymptoticProfile:
    """
    Leading MSE constant of an optimally tuned postcolored estimator.

    mse = (2p+1) {(2A/p)^p |B xi|}^{2/(2p+1)} with xi = kappa1 - kappa1_model;
    the squared bias is mse / (2p+1) and the variance 2p mse / (2p+1).
    """
    kernel = kernel or bartlett_kernel()
    p = _finite_order(kernel)
    A, B = kernel.const_A, kernel.const_B
    xi = float(kappa1) - float(kappa1_model)
    mse = (2 * p + 1) * ((2 * A / p) ** p * abs(B * xi)) ** (2.0 / (2 * p + 1))
    bias = math.copysign(math.sqrt(mse / (2 * p + 1)), B * xi) if xi != 0 else 0.0
    var = 2 * p * mse / (2 * p + 1)
    return AsymptoticProfile(mse, bias, var, xi)


def improvement_region_ar1(kappa1: float) -> tuple[float, float]:
    """
    Interval of AR(1) coloring parameters that reduce the asymptotic MSE.

    The break-even point solves |kappa1 - 2 phi / (1 - phi^2)| = |kappa1|:
    phi = {-1 + (4 kappa1^2 + 1)^{1/2}} / (2 kappa1). The interval is
    (0, phi) for kappa1 > 0, (phi, 0) for kappa1 < 0 and empty for
    kappa1 = 0.
    """
    k = float(kappa1)
    if k == 0.0:
        return (0.0, 0.0)
    # 2k / (1 + sqrt(4k^2 + 1)) is the same root without cancellation near 0
    root = 2.0 * k / (1.0 + math.sqrt(4.0 * k * k + 1.0))
    return (0.0, root) if k > 0 else (root, 0.0)


def arma11_improvement_table(a_grid, b_grid, kernel: KernelSpec | None = None, phi=None) -> list[dict]:
    """
    Asymptotic comparison of unadjusted, prewhitened and tail estimators.

    For ARMA(1,1) truth (a, b) and AR(1) coloring/whitening parameter phi
    (the lag-one autocorrelation by default) each row holds n^{2/3}-scaled
    MSE, squared-bias and variance differences pw-un, tail-un and tail-pw,
    plus each estimator's scaled bias.
    """
    kernel = kernel or bartlett_kernel()
    rows = []
    for a in np.atleast_1d(a_grid):
        for b in np.atleast_1d(b_grid):
            a, b = float(a), float(b)
            if abs(a) >= 1 or abs(b) >= 1 or abs(1.0 + b) < 1e-12:
                continue
            truth = ARMA11Model(a, b)
            g = truth.autocovs(1)
            ph = g[1] / g[0] if phi is None else float(phi)
            v0, v1 = truth.lrv(), truth.vp(1)
            kx = v1 / v0
            kz = ((1 - ph) ** 2 * v1 - 2 * ph * g[0]) / ((1 - ph) ** 2 * v0)
            k_ar = 2 * ph / (1 - ph * ph)
            un = asymptotic_profile(kx, 0.0, kernel)
            pw = asymptotic_profile(kz, 0.0, kernel)
            tl = asymptotic_profile(kx, k_ar, kernel)
            row = {"a": a, "b": b, "phi": ph}
            for name, (p1, p2) in {"pw_un": (pw, un), "tail_un": (tl, un), "tail_pw": (tl, pw)}.items():
                row[f"mse_{name}"] = p1.mse_n23 - p2.mse_n23
                row[f"bias2_{name}"] = p1.bias_n13**2 - p2.bias_n13**2
                row[f"var_{name}"] = p1.var_n23 - p2.var_n23
            row.update(bias_un=un.bias_n13, bias_pw=pw.bias_n13, bias_tail=tl.bias_n13)
            rows.append(row)
    return rows
