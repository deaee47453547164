"""Counterexample search: the margin objective and projected sign-gradient descent."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InputError
from .geometry import Box
from .network import Network


def _check_label(net: Network, K: int) -> None:
    if net.num_classes < 2:
        raise InputError("objective needs at least two classes")
    if not 0 <= K < net.num_classes:
        raise InputError(f"class {K} out of range for {net.num_classes} classes")


def _runner_up(scores: np.ndarray, K: int) -> np.ndarray:
    others = np.array(scores, dtype=np.float64, copy=True)
    others[..., K] = -np.inf
    return np.argmax(others, axis=-1)


def objective(net: Network, K: int, x) -> float:
    """Score of class K minus the best other score; <= 0 means x is a counterexample."""
    _check_label(net, K)
    s = net.eval(x)
    j = _runner_up(s, K)
    if s.ndim == 1:
        return float(s[K] - s[j])
    return s[:, K] - s[np.arange(s.shape[0]), j]


def objective_and_gradient(net: Network, K: int, x):
    """Objective value(s) and subgradient(s); runner-up ties go to the lowest index."""
    _check_label(net, K)
    x = np.asarray(x, dtype=np.float64)
    scores = net.eval(x)
    j = _runner_up(scores, K)
    coeffs = np.zeros_like(scores)
    coeffs[..., K] = 1.0
    if scores.ndim == 1:
        coeffs[j] -= 1.0
        value = float(scores[K] - scores[j])
    else:
        rows = np.arange(scores.shape[0])
        coeffs[rows, j] -= 1.0
        value = scores[:, K] - scores[rows, j]
    _, grad = net.eval_with_grad(x, coeffs)
    return value, grad


def objective_gradient(net: Network, K: int, x) -> np.ndarray:
    return objective_and_gradient(net, K, x)[1]


@dataclass(frozen=True)
class PgdConfig:
    restarts: int = 8
    steps: int = 100
    step_scale: float = 0.1
    decay: float = 0.95
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1 or self.steps < 1:
            raise InputError("restarts and steps must be at least 1")
        if not 0 < self.decay <= 1:
            raise InputError(f"decay must lie in (0, 1], got {self.decay}")


@dataclass(frozen=True, eq=False)
class Candidate:
    x: np.ndarray
    value: float
    restart: int = 0
    steps: int = 0

    @classmethod
    def at(cls, net: Network, K: int, x, **kw) -> "Candidate":
        x = np.array(x, dtype=np.float64)
        return cls(x, objective(net, K, x), **kw)


def minimize(net: Network, region: Box, K: int, cfg: PgdConfig = PgdConfig(),
             target: Optional[float] = None) -> Candidate:
    """Projected sign-gradient descent on the objective over ``region``.

    All restarts run as one batch. Restart 0 starts at the region center, the
    others uniformly in the region. Stops early once some restart reaches
    ``target``. The returned point is never worse than the center.
    """
    if region.dim != net.input_dim:
        raise InputError(f"region has dimension {region.dim}, network expects {net.input_dim}")
    rng = np.random.default_rng(cfg.seed)
    x = np.empty((cfg.restarts, region.dim))
    x[0] = region.center
    if cfg.restarts > 1:
        x[1:] = region.sample(rng, cfg.restarts - 1)
    step = cfg.step_scale * region.widths

    value, grad = objective_and_gradient(net, K, x)
    best_x = x.copy()
    best_v = value.copy()
    taken = 0
    for t in range(cfg.steps):
        if target is not None and best_v.min() <= target:
            break
        x = region.project(x - step * np.sign(grad))
        value, grad = objective_and_gradient(net, K, x)
        better = value < best_v
        best_v = np.where(better, value, best_v)
        best_x[better] = x[better]
        step = step * cfg.decay
        taken = t + 1
    # argmin picks the lowest restart index among ties
    r = int(np.argmin(best_v))
    return Candidate(best_x[r].copy(), float(best_v[r]), restart=r, steps=taken)
