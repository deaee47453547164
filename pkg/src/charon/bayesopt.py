"""Bayesian optimization with a Matern-5/2 Gaussian process and expected improvement.

Maximizes a black-box function over a box. Inputs are mapped to the unit cube,
targets standardized per fit; the length-scale is picked from a small grid by
marginal likelihood and the acquisition is maximized over random samples.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError
from scipy.spatial.distance import cdist
from scipy.stats import norm, qmc

from .errors import CharonError, InputError, NumericError

SQRT5 = math.sqrt(5.0)
LENGTH_SCALES = (0.05, 0.1, 0.2, 0.4, 0.8)


def matern52(r, variance: float = 1.0, length_scale: float = 1.0):
    if length_scale <= 0:
        raise InputError(f"length scale must be positive, got {length_scale}")
    s = SQRT5 * np.asarray(r, dtype=np.float64) / length_scale
    return variance * (1.0 + s + s * s / 3.0) * np.exp(-s)


class GpModel:
    """Zero-mean GP regression on standardized targets."""

    def __init__(self, X=None, y=None, variance: float = 1.0, length_scale: float = 0.2,
                 jitter: float = 1e-6):
        self.variance = variance
        self.length_scale = length_scale
        self.jitter = jitter
        d = 0 if X is None else np.asarray(X).shape[1]
        self.X = np.zeros((0, d)) if X is None else np.asarray(X, dtype=np.float64)
        y = np.zeros(0) if y is None else np.asarray(y, dtype=np.float64).reshape(-1)
        if y.shape[0] != self.X.shape[0]:
            raise InputError("X and y have different numbers of rows")
        self.y_mean = float(y.mean()) if y.size else 0.0
        self.y_std = max(float(y.std()), 1e-9) if y.size else 1.0
        self.y = (y - self.y_mean) / self.y_std
        self._factor()

    def _factor(self):
        n = self.X.shape[0]
        self.noise = self.jitter
        if n == 0:
            self._chol = None
            self._alpha = np.zeros(0)
            return
        K = matern52(cdist(self.X, self.X), self.variance, self.length_scale)
        noise = self.jitter
        while True:
            try:
                self._chol = cho_factor(K + noise * np.eye(n), lower=True)
                break
            except LinAlgError:
                noise = noise * 10 if noise > 0 else 1e-10
                if noise > 1e-2:
                    raise NumericError("kernel matrix is not positive definite even with "
                                       "jitter 1e-2", context=self.X) from None
        self.noise = noise
        self._alpha = cho_solve(self._chol, self.y)

    def log_marginal_likelihood(self) -> float:
        n = self.X.shape[0]
        if n == 0:
            return 0.0
        L = self._chol[0]
        return float(-0.5 * self.y @ self._alpha - np.log(np.diag(L)).sum()
                     - 0.5 * n * math.log(2 * math.pi))

    def posterior(self, x):
        """Predictive mean and standard deviation in the original target units."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        prior = self.variance + self.noise
        if self.X.shape[0] == 0:
            mu = np.zeros(x.shape[0])
            var = np.full(x.shape[0], prior)
        else:
            ks = matern52(cdist(x, self.X), self.variance, self.length_scale)
            mu = ks @ self._alpha
            v = cho_solve(self._chol, ks.T)
            var = prior - np.einsum("ij,ji->i", ks, v)
        std = np.sqrt(np.maximum(var, 0.0))
        return mu * self.y_std + self.y_mean, std * self.y_std


def fit_gp(X, y, jitter: float = 1e-6, grid: Sequence[float] = LENGTH_SCALES) -> GpModel:
    best = None
    for ls in grid:
        m = GpModel(X, y, length_scale=ls, jitter=jitter)
        ll = m.log_marginal_likelihood()
        if best is None or ll > best[0]:
            best = (ll, m)
    return best[1]


def expected_improvement(mu, sigma, best: float, xi: float = 0.01):
    mu = np.asarray(mu, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    gain = mu - best - xi
    safe = np.where(sigma < 1e-12, 1.0, sigma)
    z = gain / safe
    ei = gain * norm.cdf(z) + safe * norm.pdf(z)
    ei = np.where(sigma < 1e-12, np.maximum(gain, 0.0), ei)
    ei = np.maximum(ei, 0.0)
    return float(ei) if ei.ndim == 0 else ei


@dataclass
class BoConfig:
    lower: Sequence[float]
    upper: Sequence[float]
    init_points: int = 8
    iterations: int = 60
    samples: int = 2048
    xi: float = 0.01
    seed: int = 0

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=np.float64)
        hi = np.asarray(self.upper, dtype=np.float64)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise InputError("bounds must be vectors of equal length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(lo < hi)):
            raise InputError("bounds must be finite with lower < upper")
        if self.iterations < 0 or self.init_points < 1:
            raise InputError("need iterations >= 0 and init_points >= 1")
        self.lower, self.upper = lo, hi

    @property
    def dims(self) -> int:
        return self.lower.shape[0]


class EvaluationError(CharonError):
    def __init__(self, x, cause):
        super().__init__(f"objective failed at x={list(x)}: {cause}")
        self.x = x


@dataclass
class BoResult:
    x_best: np.ndarray
    y_best: float
    history: list = field(default_factory=list)

    def history_jsonl(self) -> str:
        return "".join(json.dumps(h) + "\n" for h in self.history)


def initial_design(cfg: BoConfig) -> np.ndarray:
    """Latin hypercube in the unit cube; the first row is the origin clipped into bounds."""
    origin = np.clip(0.0, cfg.lower, cfg.upper)
    zero_unit = (origin - cfg.lower) / (cfg.upper - cfg.lower)
    rest = cfg.init_points - 1
    if rest == 0:
        return zero_unit[None, :]
    lhs = qmc.LatinHypercube(d=cfg.dims, seed=np.random.default_rng(cfg.seed)).random(rest)
    return np.vstack([zero_unit, lhs])


def maximize(f: Callable[[np.ndarray], float], cfg: BoConfig,
             callback: Optional[Callable[[dict], None]] = None) -> BoResult:
    rng = np.random.default_rng([cfg.seed, 1])
    scale = cfg.upper - cfg.lower
    U, Y, history = [], [], []
    best_y, best_x = -np.inf, None

    def evaluate(u):
        nonlocal best_y, best_x
        x = cfg.lower + u * scale
        try:
            y = float(f(x))
        except Exception as exc:
            raise EvaluationError(x, exc) from exc
        U.append(u)
        Y.append(y)
        if y > best_y:
            best_y, best_x = y, x
        rec = {"iter": len(history), "x": x.tolist(), "y": y, "incumbent": best_y}
        history.append(rec)
        if callback is not None:
            callback(rec)

    for u in initial_design(cfg):
        evaluate(u)
    for _ in range(cfg.iterations):
        gp = fit_gp(np.array(U), np.array(Y))
        cand = rng.random((cfg.samples, cfg.dims))
        mu, sd = gp.posterior(cand)
        ei = expected_improvement(mu, sd, best_y, cfg.xi)
        evaluate(cand[int(np.argmax(ei))])
    return BoResult(np.asarray(best_x), float(best_y), history)
