"""
One-call LRV estimation with data-driven bandwidths.

``estimate_lrv`` dispatches on a method tag and picks the bandwidth by a
named rule when ``ell="auto"``:

=========  ====================================================
method     automatic bandwidth
=========  ====================================================
un         Andrews AR(1) plug-in, or nonparametric kappa~_1
lugsail    Andrews AR(1) plug-in
pw         Andrews AR(1) plug-in on the prewhitened series
tail       ell_tail with nonparametric or parametric xi_1
para       none
=========  ====================================================
"""
from __future__ import annotations

from .bandwidth import (
    ell_andrews_from_series,
    ell_tail,
    ell_unadjusted_nonparametric,
    xi1_nonparametric,
    xi1_parametric,
)
from .core import KernelSpec, as_series, bartlett_kernel, lugsail_kernel, sample_autocov
from .estimators import (
    LrvEstimate,
    lrv_parametric_ar1,
    lrv_prewhitened_ar1,
    lrv_tail_postcolored,
    lrv_unadjusted,
)
from .models import fit_ar1

__all__ = ["METHODS", "BANDWIDTH_RULES", "estimate_lrv", "select_bandwidth"]

METHODS = ("un", "lugsail", "pw", "tail", "para")
BANDWIDTH_RULES = ("default", "andrews", "nonparametric", "parametric")


def select_bandwidth(x, method: str, rule: str = "default", kernel: KernelSpec | None = None,
                     clamp: float = 0.97) -> int:
    """
    Data-driven bandwidth for ``method``.

    ``rule="default"`` means Andrews for ``un``, ``lugsail`` and ``pw`` and
    the nonparametric plug-in for ``tail``.
    """
    if rule not in BANDWIDTH_RULES:
        raise ValueError(f"unknown bandwidth rule {rule!r}; choose from {BANDWIDTH_RULES}")
    x = as_series(x, min_length=4)
    n = x.shape[0]
    if method == "para":
        return 0
    if method == "pw":
        return ell_andrews_from_series(x, prewhitened=True, clamp=clamp)
    if method in ("un", "lugsail"):
        if rule == "nonparametric":
            return ell_unadjusted_nonparametric(x, kernel)
        return ell_andrews_from_series(x)
    if method == "tail":
        kernel = kernel or bartlett_kernel()
        xi = xi1_parametric(x) if rule == "parametric" else xi1_nonparametric(x)
        return ell_tail(xi, kernel, n)
    raise ValueError(f"unknown method {method!r}; choose from {METHODS}")


def estimate_lrv(x, method: str = "tail", kernel: KernelSpec | None = None, ell="auto",
                 rule: str = "default", clamp: float = 0.97) -> LrvEstimate:
    """
    Estimate the long-run variance of a series.

    Parameters
    ----------
    x : array_like
        Univariate series.
    method : {"tail", "un", "lugsail", "pw", "para"}
        Estimator. ``lugsail`` ignores ``kernel`` and uses the default
        lugsail window.
    kernel : KernelSpec, optional
        Lag window, Bartlett by default.
    ell : int or "auto"
        Bandwidth; ``"auto"`` applies :func:`select_bandwidth`.
    rule : str
        Bandwidth rule for ``ell="auto"``.
    clamp : float
        Prewhitening bound on |phi|.

    Returns
    -------
    LrvEstimate
    """
    x = as_series(x, min_length=4)
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    if method == "para":
        return lrv_parametric_ar1(x)
    if method == "lugsail":
        kernel = lugsail_kernel()
    kernel = kernel or bartlett_kernel()
    if ell == "auto":
        ell = select_bandwidth(x, method, rule, kernel, clamp)
    ell = int(ell)
    if method == "pw":
        return lrv_prewhitened_ar1(x, kernel, ell, clamp=clamp)
    acf = sample_autocov(x, kernel.lag_limit(ell, x.shape[0]))
    if method == "tail":
        return lrv_tail_postcolored(x, kernel, ell, fit_ar1(acf), acf=acf)
    est = lrv_unadjusted(x, kernel, ell, acf=acf)
    est.method = method
    return est
