"""
Long-run covariance matrix estimation.

The matrix tail-postcolored estimator symmetrizes the product of the
model long-run covariance, the inverse model kernel sum and the kernel
estimate,

    V_tail = {V(theta) M^{-1}(theta) V~ + V~ M^{-1}(theta) V(theta)} / 2,

with a VAR(1) coloring model. Matrix estimates whose smallest eigenvalue
falls below 1/n are floored there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bandwidth import ell_tail, pilot_bandwidth
from .core import KernelSpec, as_multiseries, bartlett_kernel, lugsail_kernel, sample_cross_autocovs
from .models import CLAMP_EPS, VAR1Model, _clamp, fit_var1

__all__ = [
    "CovEstimate",
    "matrix_kernel_sum",
    "cov_unadjusted",
    "cov_tail_postcolored",
    "cov_prewhitened_var1",
    "cov_lugsail",
    "eigenvalue_floor",
    "ell_tail_multivariate",
    "ell_andrews_multivariate",
]

COND_LIMIT = 1e12


@dataclass
class CovEstimate:
    """
    Long-run covariance matrix estimate.

    Attributes
    ----------
    matrix : ndarray
        Symmetric (d, d) estimate.
    ell : int
        Bandwidth of the kernel part.
    method : str
        ``un``, ``pw``, ``lugsail`` or ``tail``.
    floored : bool
        Whether eigenvalues were raised to 1/n.
    """

    matrix: np.ndarray
    ell: int
    method: str
    floored: bool = False
    kernel: str | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "matrix": self.matrix.tolist(),
            "ell": int(self.ell),
            "method": self.method,
            "floored": bool(self.floored),
            "kernel": self.kernel,
        }


def _sym(a):
    return (a + a.T) / 2.0


def matrix_kernel_sum(gammas: np.ndarray, kernel: KernelSpec, ell: float, power: int = 0) -> np.ndarray:
    """sum_k K(k / ell) |k|^power Gamma_k from a stack Gamma_0, Gamma_1, ..."""
    lim = min(kernel.lag_limit(ell), len(gammas) - 1)
    w = kernel.weights(ell, lim)
    if power:
        w = w * np.arange(lim + 1, dtype=float) ** power
    half = np.tensordot(w[1:], gammas[1 : lim + 1], axes=1)
    return w[0] * gammas[0] + half + half.T


def eigenvalue_floor(v, n: int) -> CovEstimate | np.ndarray:
    """
    Raise eigenvalues below 1/n to 1/n.

    The input is symmetrized before a symmetric eigendecomposition. A
    :class:`CovEstimate` input returns a flagged copy; an array returns an
    array.
    """
    mat = v.matrix if isinstance(v, CovEstimate) else np.asarray(v, dtype=float)
    if not np.all(np.isfinite(mat)):
        raise np.linalg.LinAlgError("matrix has non-finite entries")
    lam, Q = np.linalg.eigh(_sym(mat))
    floor = 1.0 / n
    out = _sym((Q * np.maximum(lam, floor)) @ Q.T)
    if isinstance(v, CovEstimate):
        return CovEstimate(out, v.ell, v.method, True, v.kernel, dict(v.extra))
    return out


def _finish(mat, ell, method, n, floor, kernel_name, extra=None):
    est = CovEstimate(_sym(mat), int(ell), method, False, kernel_name, extra or {})
    if floor and np.linalg.eigvalsh(est.matrix).min() < 1.0 / n:
        est = eigenvalue_floor(est, n)
    return est


def _check_ell(ell, n, upper=None):
    upper = n - 1 if upper is None else upper
    if int(ell) != ell or not 1 <= ell <= upper:
        raise ValueError(f"bandwidth must be an integer in [1, {upper}], got {ell}")
    return int(ell)


def cov_unadjusted(x, kernel: KernelSpec | None = None, ell: int = 1, floor: bool = True) -> CovEstimate:
    """Kernel long-run covariance sum_{|k| < n} K(k / ell) Gamma~_k."""
    kernel = kernel or bartlett_kernel()
    x = as_multiseries(x)
    n = x.shape[0]
    ell = _check_ell(ell, n)
    gam = sample_cross_autocovs(x, kernel.lag_limit(ell, n))
    return _finish(matrix_kernel_sum(gam, kernel, ell), ell, "un", n, floor, kernel.name)


def cov_lugsail(x, ell: int = 1, c: float = 0.5, r: float = 3.0, floor: bool = True) -> CovEstimate:
    """Lugsail lag-window long-run covariance."""
    est = cov_unadjusted(x, lugsail_kernel(c, r), ell, floor)
    est.method = "lugsail"
    return est


def cov_tail_postcolored(x, kernel: KernelSpec | None = None, ell: int = 1, model: VAR1Model | None = None,
                         floor: bool = True) -> CovEstimate:
    """
    VAR(1) tail-postcolored long-run covariance.

    Parameters
    ----------
    x : array_like
        (n, d) series.
    kernel : KernelSpec, optional
        Lag window, Bartlett by default.
    ell : int
        Bandwidth.
    model : VAR1Model, optional
        Coloring model, a Yule-Walker fit by default.
    floor : bool
        Apply the 1/n eigenvalue floor when needed.
    """
    kernel = kernel or bartlett_kernel()
    x = as_multiseries(x)
    n = x.shape[0]
    ell = _check_ell(ell, n)
    model = model or fit_var1(x)
    gam = sample_cross_autocovs(x, kernel.lag_limit(ell, n))
    vt = matrix_kernel_sum(gam, kernel, ell)
    V = model.lrv()
    M = _sym(model.M(kernel, ell))
    if np.linalg.cond(M) > COND_LIMIT:
        raise np.linalg.LinAlgError("model kernel sum M is singular; change the bandwidth or regularize the model")
    prod = V @ np.linalg.solve(M, vt)
    return _finish((prod + prod.T) / 2.0, ell, "tail", n, floor, kernel.name, {"Phi": model.Phi})


def cov_prewhitened_var1(x, kernel: KernelSpec | None = None, ell: int = 1, floor: bool = True,
                         model: VAR1Model | None = None) -> CovEstimate:
    """
    VAR(1)-prewhitened long-run covariance (I - Phi)^{-1} V~(Z) (I - Phi)^{-T}.

    Raises
    ------
    numpy.linalg.LinAlgError
        If the condition number of I - Phi exceeds 1e12.
    """
    kernel = kernel or bartlett_kernel()
    x = as_multiseries(x)
    n, d = x.shape
    ell = _check_ell(ell, n, upper=n - 2)
    model = model or fit_var1(x)
    z = x[1:] - x[:-1] @ model.Phi.T
    gam = sample_cross_autocovs(z, kernel.lag_limit(ell, n - 1))
    vz = matrix_kernel_sum(gam, kernel, ell)
    R = np.eye(d) - model.Phi
    cond = np.linalg.cond(R)
    if cond > COND_LIMIT:
        raise np.linalg.LinAlgError(f"recoloring matrix I - Phi is near singular (condition number {cond:.3g})")
    Rinv = np.linalg.inv(R)
    return _finish(Rinv @ vz @ Rinv.T, ell, "pw", n, floor, kernel.name, {"Phi": model.Phi})


def ell_tail_multivariate(x, model: VAR1Model | None = None, kernel: KernelSpec | None = None) -> int:
    """
    Trace-aggregated plug-in bandwidth for the matrix tail estimator.

    xi = sum_j V~_{1,#}^{(jj)} / sum_j V~_{0,#}^{(jj)} - tr V_1(Phi) / tr V(Phi),
    then the scalar formula ceil((3 xi^2 n / 2)^{1/3}) for Bartlett.
    """
    kernel = kernel or bartlett_kernel()
    x = as_multiseries(x)
    n = x.shape[0]
    model = model or fit_var1(x)
    pilot = bartlett_kernel()
    ell0, ell1 = min(pilot_bandwidth(n, 0), n - 1), min(pilot_bandwidth(n, 1), n - 1)
    gam = sample_cross_autocovs(x, max(pilot.lag_limit(ell0, n), pilot.lag_limit(ell1, n)))
    v0 = np.trace(matrix_kernel_sum(gam, pilot, ell0))
    v1 = np.trace(matrix_kernel_sum(gam, pilot, ell1, power=1))
    tv = np.trace(model.lrv())
    if not (v0 > 0 and tv > 0):
        return 1
    xi = v1 / v0 - np.trace(model.vp(1)) / tv
    return ell_tail(xi, kernel, n)


def _ar1_columns(x, eps=CLAMP_EPS):
    """Per-column AR(1) fits: phi_j and residual variance with divisor n - 2."""
    xc = x - x.mean(0)
    g0 = np.einsum("ij,ij->j", xc, xc)
    g1 = np.einsum("ij,ij->j", xc[1:], xc[:-1])
    phi = np.array([_clamp(b / a, eps) if a > 0 else 0.0 for a, b in zip(g0, g1)])
    z = x[1:] - phi * x[:-1]
    zc = z - z.mean(0)
    s2 = np.einsum("ij,ij->j", zc, zc) / (x.shape[0] - 2)
    return phi, s2


def ell_andrews_multivariate(x, prewhitened: bool = False, n: int | None = None) -> int:
    """
    Andrews AR(1) plug-in bandwidth from d univariate AR(1) fits.

    ell = ceil([(3n/2) sum_j v1_j^2 / sum_j v0_j^2]^{1/3}) with
    v1 = 2 phi s2 / {(1-phi)^3 (1+phi)} and v0 = s2 / (1-phi)^2. With
    ``prewhitened=True`` the fits are done on the VAR(1) residuals.
    """
    x = as_multiseries(x, min_length=4)
    n = x.shape[0] if n is None else n
    upper = n - 1
    if prewhitened:
        model = fit_var1(x)
        x = x[1:] - x[:-1] @ model.Phi.T
        upper = n - 2
    phi, s2 = _ar1_columns(x)
    v1 = 2.0 * phi * s2 / ((1.0 - phi) ** 3 * (1.0 + phi))
    v0 = s2 / (1.0 - phi) ** 2
    den = np.sum(v0**2)
    if not den > 0:
        return 1
    val = (1.5 * n * np.sum(v1**2) / den) ** (1.0 / 3.0)
    if not math.isfinite(val):
        return upper
    return int(min(max(math.ceil(val), 1), upper))
