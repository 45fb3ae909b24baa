"""
Spectral density estimation at arbitrary frequencies.

The kernel estimate

    f~(omega) = (1 / 2 pi) sum_{|k| < n} K(k / ell) gamma~_k cos(k omega)

is recolored by eta(omega) = sum_k gamma_k(theta) cos(k omega) / sum_k K(k / ell) gamma_k(theta) cos(k omega).
At omega = 0 both estimators equal the LRV estimators divided by 2 pi.
Frequencies must lie in [0, pi]; :func:`fold_frequency` maps any real
frequency there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import KernelSpec, as_series, bartlett_kernel, sample_autocov
from .models import ColoringModel, fit_ar1, safe_ratio

__all__ = [
    "SpectralEstimate",
    "fold_frequency",
    "kernel_cosine_sum",
    "spectral_unadjusted",
    "spectral_tail_postcolored",
]


@dataclass
class SpectralEstimate:
    """
    Spectral density estimates on a frequency grid.

    Attributes
    ----------
    omega : ndarray
        Frequencies in [0, pi].
    value : ndarray
        Density estimates (variance per radian), one per frequency.
    eta : ndarray
        Recoloring coefficients (ones for the unadjusted estimator).
    model_density : ndarray or None
        Spectral density f(omega; theta) of the coloring model.
    """

    omega: np.ndarray
    value: np.ndarray
    eta: np.ndarray
    ell: int
    method: str
    kernel: str
    model_density: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {
            "omega": self.omega.tolist(),
            "value": self.value.tolist(),
            "eta": self.eta.tolist(),
            "ell": int(self.ell),
            "method": self.method,
            "kernel": self.kernel,
        }


def fold_frequency(omega) -> np.ndarray:
    """Map frequencies onto [0, pi] using evenness and 2 pi periodicity."""
    w = np.abs(np.atleast_1d(np.asarray(omega, dtype=float)))
    if not np.all(np.isfinite(w)):
        raise ValueError("frequencies must be finite")
    w = np.mod(w, 2.0 * math.pi)
    return np.where(w > math.pi, 2.0 * math.pi - w, w)


def kernel_cosine_sum(gammas: np.ndarray, kernel: KernelSpec, ell: float, omega) -> np.ndarray:
    """w_0 gamma_0 + 2 sum_{k >= 1} K(k / ell) gamma_k cos(k omega) for each omega."""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    lim = min(kernel.lag_limit(ell), len(gammas) - 1)
    w = kernel.weights(ell, lim) * np.asarray(gammas[: lim + 1])
    k = np.arange(1, lim + 1)
    return w[0] + 2.0 * np.cos(np.outer(omega, k)) @ w[1:]


def _check_omega(omega) -> np.ndarray:
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    if w.ndim != 1 or not np.all(np.isfinite(w)) or np.any(w < 0.0) or np.any(w > math.pi):
        raise ValueError("frequencies must lie in [0, pi]; use fold_frequency for other values")
    return w


def _prepare(x, kernel, ell):
    kernel = kernel or bartlett_kernel()
    x = as_series(x)
    n = x.shape[0]
    if int(ell) != ell or not 1 <= ell < n:
        raise ValueError(f"bandwidth must be an integer in [1, {n - 1}], got {ell}")
    return x, kernel, int(ell)


def spectral_unadjusted(x, kernel: KernelSpec | None = None, ell: int = 1, omega=0.0) -> SpectralEstimate:
    """
    Kernel spectral density estimate f~(omega) on a grid of frequencies.

    Raises
    ------
    ValueError
        If a frequency lies outside [0, pi].
    """
    x, kernel, ell = _prepare(x, kernel, ell)
    w = _check_omega(omega)
    acf = sample_autocov(x, kernel.lag_limit(ell, x.shape[0]))
    val = kernel_cosine_sum(acf.gammas, kernel, ell, w) / (2.0 * math.pi)
    return SpectralEstimate(w, val, np.ones_like(val), ell, "un", kernel.name)


def spectral_tail_postcolored(x, kernel: KernelSpec | None = None, ell: int = 1, omega=0.0,
                              model: ColoringModel | None = None) -> SpectralEstimate:
    """
    Tail-postcolored spectral estimate eta(omega) f~(omega).

    Parameters
    ----------
    model : ColoringModel, optional
        Coloring model with a ``spectrum`` method, an AR(1) fit by default.
    """
    x, kernel, ell = _prepare(x, kernel, ell)
    w = _check_omega(omega)
    lim = kernel.lag_limit(ell, x.shape[0])
    acf = sample_autocov(x, lim)
    model = model or fit_ar1(acf)
    base = kernel_cosine_sum(acf.gammas, kernel, ell, w) / (2.0 * math.pi)
    num = np.asarray(model.spectrum(w), dtype=float)
    den = kernel_cosine_sum(model.autocovs(lim), kernel, ell, w)
    eta = np.array([safe_ratio(a, b) for a, b in zip(num, den)])
    return SpectralEstimate(w, eta * base, eta, ell, "tail", kernel.name, num / (2.0 * math.pi))
