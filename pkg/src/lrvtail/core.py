"""
Series containers, sample autocovariances and lag-window kernels.

The long-run variance of a stationary series is v = sum_k gamma_k. Every
estimator in this package is built from the sample autocovariances

    gamma~_k = (1/n) sum_{i=|k|+1}^{n} (X_i - Xbar)(X_{i-|k|} - Xbar)

(divisor n, not n - k) weighted by a lag window K(k / ell).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial
from typing import Callable

import numpy as np

__all__ = [
    "DegenerateSeriesError",
    "KernelSpec",
    "AutocovTable",
    "as_series",
    "as_multiseries",
    "bartlett_kernel",
    "truncated_kernel",
    "lugsail_kernel",
    "get_kernel",
    "sample_autocov",
    "sample_cross_autocov",
    "sample_cross_autocovs",
]

# direct dot products are exact to rounding; FFT is only used for long lag ranges
_FFT_MIN_WORK = 5_000_000


class DegenerateSeriesError(ValueError):
    """Raised when a series carries no variation to estimate from."""


def as_series(x, min_length: int = 2) -> np.ndarray:
    """
    Validate a univariate series.

    Parameters
    ----------
    x : array_like
        Observations ordered in time.
    min_length : int
        Smallest admissible sample size.

    Returns
    -------
    ndarray
        1-d float64 copy-free view of the data.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d series, got shape {arr.shape}")
    if arr.shape[0] < min_length:
        raise ValueError(f"series needs at least {min_length} observations, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("series contains non-finite values")
    return arr


def as_multiseries(x, min_length: int = 2) -> np.ndarray:
    """
    Validate a multivariate series with rows as time points.

    A 1-d input is treated as a single column.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"expected an (n, d) array, got shape {arr.shape}")
    if arr.shape[0] < min_length or arr.shape[1] < 1:
        raise ValueError(f"series needs at least {min_length} rows and one column, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("series contains non-finite values")
    return arr


# ---------------------------------------------------------------------------
# kernels


def _bartlett(t):
    return np.maximum(1.0 - np.abs(t), 0.0)


def _truncated(t):
    return (np.abs(t) <= 1.0).astype(float)


def _lugsail(t, c, r):
    return (_bartlett(t) - c * _bartlett(r * np.asarray(t))) / (1.0 - c)


@dataclass(frozen=True)
class KernelSpec:
    """
    Lag-window kernel together with its characteristic constants.

    Parameters
    ----------
    name : str
        Identifier used in output records.
    evaluator : callable
        Vectorized even function with ``evaluator(0) == 1``.
    order_p : float
        Characteristic exponent p with K(t) = 1 + B|t|^p + o(|t|^p).
        ``math.inf`` marks flat-top kernels; operations that need a finite
        order reject them.
    const_A : float
        Integral of K(t)^2 over the positive half line.
    const_B : float
        Limit of (K(t) - 1) / |t|^p at zero. ``nan`` when the order is
        infinite.
    psd : bool
        Whether the implied lag weighting is positive semidefinite.
    support : float
        K(t) = 0 for |t| > support (``math.inf`` if unbounded).
    """

    name: str
    evaluator: Callable[[np.ndarray], np.ndarray]
    order_p: float
    const_A: float
    const_B: float
    psd: bool
    support: float = 1.0

    def __call__(self, t):
        return self.evaluator(np.asarray(t, dtype=float))

    @property
    def finite_order(self) -> bool:
        return math.isfinite(self.order_p)

    def lag_limit(self, ell: float, n: int | None = None) -> int:
        """Largest lag that can receive nonzero weight at bandwidth ``ell``."""
        if math.isfinite(self.support):
            lim = int(math.floor(self.support * ell))
        else:
            lim = n - 1 if n is not None else int(1e7)
        if n is not None:
            lim = min(lim, n - 1)
        return max(lim, 0)

    def weights(self, ell: float, max_lag: int) -> np.ndarray:
        """Return K(k / ell) for k = 0..max_lag."""
        return self(np.arange(max_lag + 1) / ell)


def bartlett_kernel() -> KernelSpec:
    """Triangular kernel K(t) = max(1 - |t|, 0)."""
    return KernelSpec("bartlett", _bartlett, 1.0, 1.0 / 3.0, -1.0, True, 1.0)


def truncated_kernel() -> KernelSpec:
    """Indicator kernel K(t) = 1(|t| <= 1), of infinite order."""
    return KernelSpec("truncated", _truncated, math.inf, 1.0, math.nan, False, 1.0)


def lugsail_kernel(c: float = 0.5, r: float = 3.0) -> KernelSpec:
    """
    Lugsail combination of a Bartlett window at two scales.

    K(t) = {K_B(t) - c K_B(r t)} / (1 - c). With ``c = 0`` this is the
    Bartlett kernel.

    Parameters
    ----------
    c : float
        Mixing weight in [0, 1).
    r : float
        Scale of the second window, r >= 1.
    """
    if not 0.0 <= c < 1.0:
        raise ValueError(f"lugsail weight c must lie in [0, 1), got {c}")
    if r < 1.0:
        raise ValueError(f"lugsail scale r must be >= 1, got {r}")
    if c == 0.0:
        spec = bartlett_kernel()
        return KernelSpec(f"lugsail(c=0,r={r:g})", spec.evaluator, 1.0, 1.0 / 3.0, -1.0, True, 1.0)
    # piecewise linear: on [0, 1/r] the slope is (cr - 1)/(1 - c), on [1/r, 1] it is K_B/(1-c)
    alpha, beta, h = 1.0 - c, c * r - 1.0, 1.0 / r
    inner = alpha**2 * h + alpha * beta * h**2 + beta**2 * h**3 / 3.0
    outer = (1.0 - h) ** 3 / 3.0
    const_A = (inner + outer) / (1.0 - c) ** 2
    slope = beta / (1.0 - c)
    if abs(slope) < 1e-15:
        order, const_B = math.inf, math.nan
    else:
        order, const_B = 1.0, slope
    return KernelSpec(f"lugsail(c={c:g},r={r:g})", partial(_lugsail, c=c, r=r), order, const_A, const_B, False, 1.0)


def get_kernel(name: str) -> KernelSpec:
    """Look up a kernel by name: ``bartlett``, ``truncated`` or ``lugsail``."""
    key = name.lower()
    if key == "bartlett":
        return bartlett_kernel()
    if key == "truncated":
        return truncated_kernel()
    if key == "lugsail":
        return lugsail_kernel()
    raise ValueError(f"unknown kernel {name!r}")


# ---------------------------------------------------------------------------
# autocovariances


@dataclass(frozen=True)
class AutocovTable:
    """
    Sample autocovariances gamma~_0..gamma~_L of a series of length n.
    """

    gammas: np.ndarray
    n: int

    def __getitem__(self, k):
        return self.gammas[abs(k)] if isinstance(k, (int, np.integer)) else self.gammas[k]

    def __len__(self):
        return len(self.gammas)

    @property
    def max_lag(self) -> int:
        return len(self.gammas) - 1


def _autocov_direct(xc: np.ndarray, max_lag: int) -> np.ndarray:
    n = xc.shape[0]
    out = np.empty(max_lag + 1)
    for k in range(max_lag + 1):
        out[k] = xc[k:] @ xc[: n - k]
    return out / n


def _autocov_fft(xc: np.ndarray, max_lag: int) -> np.ndarray:
    n = xc.shape[0]
    nfft = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(xc, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[: max_lag + 1]
    return acov / n


def sample_autocov(x, max_lag: int | None = None) -> AutocovTable:
    """
    Sample autocovariances with divisor n.

    Parameters
    ----------
    x : array_like
        Univariate series of length n >= 2.
    max_lag : int, optional
        Largest lag, 0 <= max_lag < n. Defaults to n - 1.

    Returns
    -------
    AutocovTable
    """
    x = as_series(x)
    n = x.shape[0]
    if max_lag is None:
        max_lag = n - 1
    max_lag = int(max_lag)
    if not 0 <= max_lag < n:
        raise ValueError(f"max_lag must satisfy 0 <= max_lag < n={n}, got {max_lag}")
    xc = x - x.mean()
    if max_lag * n > _FFT_MIN_WORK and max_lag > 200:
        gam = _autocov_fft(xc, max_lag)
    else:
        gam = _autocov_direct(xc, max_lag)
    return AutocovTable(gam, n)


def sample_cross_autocov(x, k: int) -> np.ndarray:
    """
    Sample autocovariance matrix at lag k.

    Gamma~_k = (1/n) sum_{i=k+1}^{n} (X_i - Xbar)(X_{i-k} - Xbar)^T for
    k >= 0 and Gamma~_{-k} = Gamma~_k^T.
    """
    x = as_multiseries(x)
    n = x.shape[0]
    if abs(k) >= n:
        raise ValueError(f"|k| must be < n={n}, got {k}")
    xc = x - x.mean(0)
    m = abs(int(k))
    g = xc[m:].T @ xc[: n - m] / n
    return g if k >= 0 else g.T


def sample_cross_autocovs(x, max_lag: int) -> np.ndarray:
    """Stack of Gamma~_0..Gamma~_max_lag with shape (max_lag + 1, d, d)."""
    x = as_multiseries(x)
    n, d = x.shape
    if not 0 <= max_lag < n:
        raise ValueError(f"max_lag must satisfy 0 <= max_lag < n={n}, got {max_lag}")
    xc = x - x.mean(0)
    out = np.empty((max_lag + 1, d, d))
    for m in range(max_lag + 1):
        out[m] = xc[m:].T @ xc[: n - m]
    return out / n
