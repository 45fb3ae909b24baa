"""
Data generators for simulation experiments.

Every generator draws ``burn_in`` (1000 by default) discarded values
before the n retained ones, so the output is stationary to high accuracy.
Randomness comes from a :class:`numpy.random.Generator`; passing the
same seed reproduces the same path.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import linalg, signal

from .models import ARMA11Model, ARModel, MAModel, VAR1Model

__all__ = [
    "BURN_IN",
    "Generator",
    "ARMA11",
    "AR2",
    "MA",
    "TAR",
    "GeomAR1",
    "VARMA11",
    "MeanShift",
    "Mixture",
    "make_rng",
    "generate",
    "true_lrv",
    "generator_from_dict",
    "ma2",
    "hac_regression_design",
    "batch_means_lrv",
]

BURN_IN = 1000
LONG_PATH = 10_000_000


def make_rng(seed) -> np.random.Generator:
    """Accept an int, a SeedSequence or a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


class Generator:
    """Base class; subclasses implement ``_simulate`` and ``true_lrv``."""

    kind = "base"

    def simulate(self, n: int, rng, burn_in: int = BURN_IN) -> np.ndarray:
        if n < 1:
            raise ValueError("n must be positive")
        return self._simulate(int(n), make_rng(rng), int(burn_in))

    def _simulate(self, n, rng, burn_in):
        raise NotImplementedError

    def true_lrv(self):
        raise NotImplementedError

    def model(self):
        """Matching coloring model, when one exists."""
        raise NotImplementedError(f"{self.kind} has no closed-form model")

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class ARMA11(Generator):
    """X_i = a X_{i-1} + e_i + b e_{i-1} with e_i ~ N(0, sigma2)."""

    a: float
    b: float = 0.0
    sigma2: float = 1.0
    kind = "ARMA11"

    def __post_init__(self):
        if not abs(self.a) < 1.0:
            raise ValueError(f"ARMA11 requires |a| < 1, got {self.a}")
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive")

    def _simulate(self, n, rng, burn_in):
        e = rng.standard_normal(n + burn_in) * math.sqrt(self.sigma2)
        return signal.lfilter([1.0, self.b], [1.0, -self.a], e)[burn_in:]

    def model(self):
        return ARMA11Model(self.a, self.b, self.sigma2)

    def true_lrv(self):
        return self.sigma2 * (1.0 + self.b) ** 2 / (1.0 - self.a) ** 2

    def to_dict(self):
        return {"kind": self.kind, "a": self.a, "b": self.b, "sigma2": self.sigma2}


@dataclass(frozen=True)
class AR2(Generator):
    """X_i = a1 X_{i-1} + a2 X_{i-2} + e_i."""

    a1: float
    a2: float
    sigma2: float = 1.0
    kind = "AR2"

    def __post_init__(self):
        if not (abs(self.a2) < 1.0 and self.a2 + self.a1 < 1.0 and self.a2 - self.a1 < 1.0):
            raise ValueError(f"AR2 ({self.a1}, {self.a2}) is not stationary")

    def _simulate(self, n, rng, burn_in):
        e = rng.standard_normal(n + burn_in) * math.sqrt(self.sigma2)
        return signal.lfilter([1.0], [1.0, -self.a1, -self.a2], e)[burn_in:]

    def model(self):
        return ARModel([self.a1, self.a2], self.sigma2)

    def true_lrv(self):
        return self.sigma2 / (1.0 - self.a1 - self.a2) ** 2

    def to_dict(self):
        return {"kind": self.kind, "a1": self.a1, "a2": self.a2, "sigma2": self.sigma2}


@dataclass(frozen=True)
class MA(Generator):
    """X_i = e_i + sum_j thetas[j-1] e_{i-j}."""

    thetas: tuple
    sigma2: float = 1.0
    kind = "MA"

    def __post_init__(self):
        object.__setattr__(self, "thetas", tuple(float(t) for t in self.thetas))
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive")

    def _simulate(self, n, rng, burn_in):
        q = len(self.thetas)
        e = rng.standard_normal(n + q) * math.sqrt(self.sigma2)
        return signal.lfilter((1.0,) + self.thetas, [1.0], e)[q:]

    def model(self):
        return MAModel(self.thetas, self.sigma2)

    def true_lrv(self):
        return self.sigma2 * (1.0 + sum(self.thetas)) ** 2

    def to_dict(self):
        return {"kind": self.kind, "thetas": list(self.thetas), "sigma2": self.sigma2}


def ma2(b1: float, b2: float, sigma2: float = 1.0) -> MA:
    """X_i = e_i + b1 e_{i-1} + b2 e_{i-2}."""
    return MA((b1, b2), sigma2)


def _cache_dir() -> Path:
    return Path(os.environ.get("LRVTAIL_CACHE", Path.home() / ".cache" / "lrvtail"))


def batch_means_lrv(x: np.ndarray) -> tuple[float, float]:
    """Batch-means LRV with batch size floor(sqrt(n)); returns (value, standard error)."""
    n = x.shape[0]
    b = int(math.isqrt(n))
    a = n // b
    means = x[: a * b].reshape(a, b).mean(1)
    v = b * means.var(ddof=1)
    return float(v), float(v * math.sqrt(2.0 / (a - 1)))


def _cached_lrv(gen: Generator, seed: int, length: int) -> tuple[float, float]:
    key = json.dumps({"gen": gen.to_dict(), "seed": seed, "length": length}, sort_keys=True)
    path = _cache_dir() / "true_lrv.json"
    try:
        cache = json.loads(path.read_text())
    except (OSError, ValueError):
        cache = {}
    if key in cache:
        return tuple(cache[key])
    x = gen.simulate(length, np.random.default_rng(seed))
    val = batch_means_lrv(x)
    cache[key] = list(val)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(cache, indent=1))
    except OSError:
        pass
    return val


@dataclass(frozen=True)
class TAR(Generator):
    """X_i = rho1 max(X_{i-1}, 0) + rho2 min(0, X_{i-1}) + e_i."""

    rho1: float
    rho2: float
    kind = "TAR"

    def __post_init__(self):
        if not max(self.rho1, self.rho2) < 1.0 or not min(self.rho1, self.rho2) > -1.0:
            raise ValueError(f"TAR requires |rho| < 1, got ({self.rho1}, {self.rho2})")

    def _simulate(self, n, rng, burn_in):
        e = rng.standard_normal(n + burn_in)
        out = np.empty_like(e)
        r1, r2, prev = self.rho1, self.rho2, 0.0
        for i, ei in enumerate(e.tolist()):
            prev = (r1 if prev > 0 else r2) * prev + ei
            out[i] = prev
        return out[burn_in:]

    def true_lrv(self, seed: int = 20240101, length: int = LONG_PATH):
        return _cached_lrv(self, seed, length)[0]

    def to_dict(self):
        return {"kind": self.kind, "rho1": self.rho1, "rho2": self.rho2}


@dataclass(frozen=True)
class GeomAR1(Generator):
    """X_i = exp(Y_i) with Y_i = phi Y_{i-1} + e_i, e_i ~ N(0, 1)."""

    phi: float
    kind = "GeomAR1"

    def __post_init__(self):
        if not abs(self.phi) < 1.0:
            raise ValueError(f"GeomAR1 requires |phi| < 1, got {self.phi}")

    def _simulate(self, n, rng, burn_in):
        e = rng.standard_normal(n + burn_in)
        return np.exp(signal.lfilter([1.0], [1.0, -self.phi], e)[burn_in:])

    def true_lrv(self):
        # Cov(e^{Y_0}, e^{Y_k}) = e^s (e^{phi^|k| s} - 1) with s = Var(Y)
        s = 1.0 / (1.0 - self.phi**2)
        total, k = math.expm1(s), 1
        while True:
            term = math.expm1(self.phi**k * s)
            total += 2.0 * term
            if abs(term) < 1e-16 * abs(total):
                break
            k += 1
        return math.exp(s) * total

    def to_dict(self):
        return {"kind": self.kind, "phi": self.phi}


@dataclass(frozen=True)
class VARMA11(Generator):
    """X_i = Phi X_{i-1} + e_i + Upsilon e_{i-1}, e_i ~ N_d(0, Sigma)."""

    Phi: np.ndarray
    Upsilon: np.ndarray
    Sigma: np.ndarray
    kind = "VARMA11"

    def __post_init__(self):
        Phi = np.atleast_2d(np.asarray(self.Phi, dtype=float))
        Ups = np.atleast_2d(np.asarray(self.Upsilon, dtype=float))
        Sig = np.atleast_2d(np.asarray(self.Sigma, dtype=float))
        d = Phi.shape[0]
        if Phi.shape != (d, d) or Ups.shape != (d, d) or Sig.shape != (d, d):
            raise ValueError("Phi, Upsilon and Sigma must be conformable square matrices")
        if np.max(np.abs(np.linalg.eigvals(Phi))) >= 1.0:
            raise ValueError("VARMA11 requires spectral radius of Phi < 1")
        if np.linalg.eigvalsh((Sig + Sig.T) / 2).min() <= 0:
            raise ValueError("Sigma must be positive definite")
        object.__setattr__(self, "Phi", Phi)
        object.__setattr__(self, "Upsilon", Ups)
        object.__setattr__(self, "Sigma", Sig)

    @property
    def dim(self) -> int:
        return self.Phi.shape[0]

    def _simulate(self, n, rng, burn_in):
        d, m = self.dim, n + burn_in
        e = rng.standard_normal((m + 1, d)) @ np.linalg.cholesky(self.Sigma).T
        u = e[1:] + e[:-1] @ self.Upsilon.T
        if np.count_nonzero(self.Phi - np.diag(np.diag(self.Phi))) == 0:
            out = np.column_stack([signal.lfilter([1.0], [1.0, -p], u[:, j]) for j, p in enumerate(np.diag(self.Phi))])
        else:
            out = np.empty((m, d))
            prev = np.zeros(d)
            for i in range(m):
                prev = self.Phi @ prev + u[i]
                out[i] = prev
        return out[burn_in:]

    def gamma0(self) -> np.ndarray:
        """Solves Gamma_0 - Phi Gamma_0 Phi^T = Sigma + (Phi + U) Sigma (Phi + U)^T - Phi Sigma Phi^T."""
        P, U, S = self.Phi, self.Upsilon, self.Sigma
        rhs = S + (P + U) @ S @ (P + U).T - P @ S @ P.T
        g0 = linalg.solve_discrete_lyapunov(P, rhs)
        return (g0 + g0.T) / 2.0

    def autocov(self, k: int) -> np.ndarray:
        """Gamma_k = E[X_{i+k} X_i^T]; Gamma_1 = Phi Gamma_0 + U Sigma."""
        if k < 0:
            return self.autocov(-k).T
        g = self.gamma0()
        if k == 0:
            return g
        g = self.Phi @ g + self.Upsilon @ self.Sigma
        return np.linalg.matrix_power(self.Phi, k - 1) @ g

    def true_lrv(self):
        R = np.linalg.inv(np.eye(self.dim) - self.Phi)
        C = np.eye(self.dim) + self.Upsilon
        return R @ C @ self.Sigma @ C.T @ R.T

    def model(self):
        if np.any(self.Upsilon):
            raise NotImplementedError("VARMA11 with nonzero Upsilon has no VAR(1) model")
        return VAR1Model(self.Phi, self.Sigma)

    def to_dict(self):
        return {"kind": self.kind, "Phi": self.Phi.tolist(), "Upsilon": self.Upsilon.tolist(),
                "Sigma": self.Sigma.tolist()}

    def __hash__(self):
        return hash(json.dumps(self.to_dict()))

    def __eq__(self, other):
        return isinstance(other, VARMA11) and self.to_dict() == other.to_dict()


@dataclass(frozen=True)
class MeanShift(Generator):
    """X_i = mu + inner_i."""

    mu: float
    inner: Generator
    kind = "MeanShift"

    def _simulate(self, n, rng, burn_in):
        return self.mu + self.inner._simulate(n, rng, burn_in)

    def true_lrv(self):
        return self.inner.true_lrv()

    def model(self):
        return self.inner.model()

    def to_dict(self):
        return {"kind": self.kind, "mu": self.mu, "inner": self.inner.to_dict()}


@dataclass(frozen=True)
class Mixture(Generator):
    """X_i = sum_j c_j X_i^{(j)} over independent components."""

    coefs: tuple
    components: tuple = field(default=())
    kind = "Mixture"

    def __post_init__(self):
        object.__setattr__(self, "coefs", tuple(float(c) for c in self.coefs))
        object.__setattr__(self, "components", tuple(self.components))
        if len(self.coefs) != len(self.components) or not self.components:
            raise ValueError("Mixture needs one coefficient per component")

    def _simulate(self, n, rng, burn_in):
        out = np.zeros(n)
        for c, g in zip(self.coefs, self.components):
            path = g._simulate(n, rng, burn_in)
            if c != 0.0:
                out += c * path
        return out

    def true_lrv(self):
        return sum(c * c * g.true_lrv() for c, g in zip(self.coefs, self.components))

    def to_dict(self):
        return {"kind": self.kind, "coefs": list(self.coefs), "components": [g.to_dict() for g in self.components]}


def generate(g: Generator, n: int, seed=None, burn_in: int = BURN_IN) -> np.ndarray:
    """Draw n observations of ``g``; identical seeds give identical paths."""
    return g.simulate(n, make_rng(seed), burn_in)


def true_lrv(g: Generator):
    """Long-run variance (matrix for VARMA11) of a generator."""
    return g.true_lrv()


def generator_from_dict(obj: dict) -> Generator:
    """Inverse of ``Generator.to_dict``."""
    kind = obj["kind"]
    args = {k: v for k, v in obj.items() if k != "kind"}
    if kind == "ARMA11":
        return ARMA11(**args)
    if kind == "AR1":
        return ARMA11(args["phi"], 0.0, args.get("sigma2", 1.0))
    if kind == "AR2":
        return AR2(**args)
    if kind in ("MA", "MA2", "MAq"):
        if "thetas" not in args:
            args = {"thetas": (args.pop("b1"), args.pop("b2")), **args}
        return MA(**args)
    if kind == "TAR":
        return TAR(**args)
    if kind == "GeomAR1":
        return GeomAR1(**args)
    if kind == "VARMA11":
        return VARMA11(**args)
    if kind == "MeanShift":
        return MeanShift(args["mu"], generator_from_dict(args["inner"]))
    if kind == "Mixture":
        return Mixture(args["coefs"], tuple(generator_from_dict(c) for c in args["components"]))
    raise ValueError(f"unknown generator kind {kind!r}")


# default design of the HAC regression experiment
HAC_PHI = np.diag([0.7, 0.7])
HAC_UPSILON = np.array([[0.3, 0.1], [0.1, 0.3]])
HAC_SIGMA = np.array([[1.0, 0.5], [0.5, 1.0]])


def hac_regression_design(n: int, a: float, b: float, delta: float, rng) -> tuple[np.ndarray, np.ndarray]:
    """
    Heteroskedastic regression with serially correlated errors.

    y_i = X_i^T beta_0 + e_i with beta_0 = (0, delta, 0), X_i = (1, X'_i)
    where X' is a bivariate VARMA(1,1), and e_i = 5 (i/n)^2 e'_i with e' a
    unit-variance ARMA(1,1)(a, b) series.
    """
    rng = make_rng(rng)
    xp = VARMA11(HAC_PHI, HAC_UPSILON, HAC_SIGMA).simulate(n, rng)
    c = math.sqrt(1.0 + (a + b) ** 2 / (1.0 - a * a))
    err = ARMA11(a, b).simulate(n, rng) / c
    err = 5.0 * (np.arange(1, n + 1) / n) ** 2 * err
    X = np.column_stack([np.ones(n), xp])
    return X, delta * X[:, 1] + err
