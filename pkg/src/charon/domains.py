"""Abstract domains for ReLU networks: intervals, zonotopes, bounded powersets.

A zonotope is ``{c + G e : e in [-1, 1]^g}``. Every public operation returns
zonotopes whose noise symbols range over exactly [-1, 1], so the bounds of
dimension i are always ``c_i -/+ sum_j |G_ij|``.

The zonotope ReLU splits each crossing dimension into its ``>= 0`` and ``<= 0``
cases and keeps at most ``k`` disjuncts; extra disjuncts are merged with a box
join. With ``k = 1`` the two cases are joined right away.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Union

import numpy as np

from .errors import InputError
from .geometry import Box
from .network import AffineLayer, Network

INTERVAL = "interval"
ZONOTOPE = "zonotope"


@dataclass(frozen=True)
class DomainSpec:
    """Base domain plus the disjunct budget ``k`` (ignored for intervals)."""

    base: str = ZONOTOPE
    k: int = 1

    def __post_init__(self):
        if self.base not in (INTERVAL, ZONOTOPE):
            raise InputError(f"unknown base domain {self.base!r}")
        if int(self.k) != self.k or self.k < 1:
            raise InputError(f"disjunct budget must be a positive integer, got {self.k!r}")

    @classmethod
    def parse(cls, text: str) -> "DomainSpec":
        """Parse ``interval``, ``zonotope`` or ``zonotope:k``."""
        name, _, k = text.strip().lower().partition(":")
        try:
            return cls(name, int(k) if k else 1)
        except ValueError:
            raise InputError(f"bad domain spec {text!r}") from None

    def __str__(self):
        if self.base == INTERVAL or self.k == 1:
            return self.base
        return f"{self.base}:{self.k}"


@dataclass(frozen=True, eq=False)
class IntervalState:
    lower: np.ndarray
    upper: np.ndarray

    @property
    def dim(self) -> int:
        return self.lower.shape[0]


@dataclass(frozen=True, eq=False)
class Zonotope:
    center: np.ndarray  # (n,)
    generators: np.ndarray  # (n, g)

    def __post_init__(self):
        c = np.asarray(self.center, dtype=np.float64).reshape(-1)
        g = np.asarray(self.generators, dtype=np.float64).reshape(c.shape[0], -1)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "generators", g)

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def radius(self) -> np.ndarray:
        return np.abs(self.generators).sum(axis=1)

    def lower(self) -> np.ndarray:
        return self.center - self.radius()

    def upper(self) -> np.ndarray:
        return self.center + self.radius()

    def zero_dim(self, d: int) -> "Zonotope":
        c = self.center.copy()
        g = self.generators.copy()
        c[d] = 0.0
        g[d, :] = 0.0
        return Zonotope(c, g)

    def contains(self, y, tol=1e-9) -> bool:
        """Exact membership test via a feasibility LP."""
        from scipy.optimize import linprog

        y = np.asarray(y, dtype=np.float64)
        ng = self.generators.shape[1]
        if ng == 0:
            return bool(np.all(np.abs(y - self.center) <= tol))
        res = linprog(np.zeros(ng), A_eq=self.generators, b_eq=y - self.center,
                      bounds=[(-1 - tol, 1 + tol)] * ng, method="highs")
        return res.status == 0


@dataclass(frozen=True)
class PowersetState:
    disjuncts: tuple

    def __post_init__(self):
        object.__setattr__(self, "disjuncts", tuple(self.disjuncts))
        if not self.disjuncts:
            raise InputError("a powerset state needs at least one disjunct")

    @property
    def dim(self) -> int:
        return self.disjuncts[0].dim


AbstractState = Union[IntervalState, Zonotope, PowersetState]


def _box_zonotope(lower, upper) -> Zonotope:
    half = (upper - lower) / 2
    keep = half > 0
    gens = np.zeros((lower.shape[0], int(keep.sum())))
    gens[np.flatnonzero(keep), np.arange(gens.shape[1])] = half[keep]
    return Zonotope((lower + upper) / 2, gens)


def abstract(box: Box, spec: DomainSpec) -> AbstractState:
    if spec.base == INTERVAL:
        return IntervalState(box.lower.copy(), box.upper.copy())
    # keep one generator per input dimension, even degenerate ones
    return PowersetState([Zonotope(box.center, np.diag(box.widths / 2))])


def affine(state: AbstractState, layer: AffineLayer) -> AbstractState:
    w, b = layer.weights, layer.bias
    if state.dim != layer.in_dim:
        raise InputError(f"layer expects dimension {layer.in_dim}, state has {state.dim}")
    if isinstance(state, IntervalState):
        mid = (state.lower + state.upper) / 2
        rad = (state.upper - state.lower) / 2
        c = w @ mid + b
        r = np.abs(w) @ rad
        return IntervalState(c - r, c + r)
    if isinstance(state, Zonotope):
        return Zonotope(w @ state.center + b, w @ state.generators)
    return PowersetState([affine(z, layer) for z in state.disjuncts])


def meet_halfspace(z: Zonotope, dim: int, sign: int):
    """Over-approximate ``{y in z : sign * y[dim] >= 0}``.

    Runs one pass of interval constraint propagation on the affine form of
    ``y[dim]`` to shrink each noise symbol's range, then rescales the symbols
    back onto [-1, 1]. Returns None when the constraint is unsatisfiable.
    """
    if sign not in (1, -1):
        raise InputError("sign must be +1 (>= 0) or -1 (<= 0)")
    c = sign * z.center[dim]
    g = sign * z.generators[dim]
    mag = np.abs(g)
    ub = c + mag.sum()
    if ub < 0:
        return None
    if c - mag.sum() >= 0:
        return z
    # g_j e_j >= -(ub - |g_j|) for every j
    rhs = mag - ub
    lo = -np.ones_like(g)
    hi = np.ones_like(g)
    pos, neg = g > 0, g < 0
    lo[pos] = np.maximum(-1.0, rhs[pos] / g[pos])
    hi[neg] = np.minimum(1.0, rhs[neg] / g[neg])
    hi = np.maximum(hi, lo)
    mid = (lo + hi) / 2
    half = (hi - lo) / 2
    center = z.center + z.generators @ mid
    gens = z.generators * half
    keep = half > 0
    return Zonotope(center, gens[:, keep])


def _hull(lowers, uppers, nonneg=None):
    lo = np.min(lowers, axis=0)
    hi = np.max(uppers, axis=0)
    if nonneg is not None:
        lo = np.where(nonneg, np.maximum(lo, 0.0), lo)
        hi = np.maximum(hi, lo)
    return lo, hi


def join(z1: Zonotope, z2: Zonotope, nonneg=None) -> Zonotope:
    """Box join: the zonotope of the interval hull of both operands.

    ``nonneg`` marks dimensions known to be non-negative (ReLU outputs); their
    lower bound is clipped at 0, which tightens the hull without losing points.
    """
    if z1.dim != z2.dim:
        raise InputError(f"cannot join zonotopes of dimension {z1.dim} and {z2.dim}")
    lo, hi = _hull([z1.lower(), z2.lower()], [z1.upper(), z2.upper()], nonneg)
    return _box_zonotope(lo, hi)


def _reduce(disjuncts: list, k: int, nonneg) -> list:
    """Merge disjuncts until at most k remain, cheapest hull volume first."""
    disjuncts = list(disjuncts)
    while len(disjuncts) > k:
        lows = [z.lower() for z in disjuncts]
        ups = [z.upper() for z in disjuncts]
        best = None
        for i, j in combinations(range(len(disjuncts)), 2):
            lo, hi = _hull([lows[i], lows[j]], [ups[i], ups[j]], nonneg)
            vol = float(np.prod(hi - lo))
            if best is None or vol < best[0]:
                best = (vol, i, j)
        _, i, j = best
        disjuncts[i] = join(disjuncts[i], disjuncts[j], nonneg)
        del disjuncts[j]
    return disjuncts


def relu(state: AbstractState, spec: DomainSpec) -> AbstractState:
    if isinstance(state, IntervalState):
        return IntervalState(np.maximum(state.lower, 0.0), np.maximum(state.upper, 0.0))
    if isinstance(state, Zonotope):
        state = PowersetState([state])
    disjuncts = list(state.disjuncts)
    n = state.dim
    done = np.zeros(n, dtype=bool)
    for d in range(n):
        nxt = []
        for z in disjuncts:
            r = np.abs(z.generators[d]).sum()
            lo, hi = z.center[d] - r, z.center[d] + r
            if lo >= 0:
                nxt.append(z)
            elif hi <= 0:
                nxt.append(z.zero_dim(d))
            else:
                for sign in (1, -1):
                    part = meet_halfspace(z, d, sign)
                    if part is not None:
                        nxt.append(part if sign > 0 else part.zero_dim(d))
        done[d] = True
        disjuncts = _reduce(nxt, spec.k, done)
    return PowersetState(disjuncts)


def bounds(state: AbstractState) -> Box:
    if isinstance(state, IntervalState):
        return Box(state.lower, state.upper)
    if isinstance(state, Zonotope):
        return Box(state.lower(), state.upper())
    lo, hi = _hull([z.lower() for z in state.disjuncts], [z.upper() for z in state.disjuncts])
    return Box(lo, hi)


def lower_bound_margin(state: AbstractState, K: int, j: int) -> float:
    """Sound lower bound of ``out[K] - out[j]`` over the concretization."""
    if K == j:
        return 0.0
    if isinstance(state, IntervalState):
        return float(state.lower[K] - state.upper[j])
    if isinstance(state, Zonotope):
        c = state.center[K] - state.center[j]
        g = state.generators[K] - state.generators[j]
        return float(c - np.abs(g).sum())
    return min(lower_bound_margin(z, K, j) for z in state.disjuncts)


@dataclass
class Analysis:
    verified: bool
    spec: DomainSpec
    margins: np.ndarray  # lower bound of out[K] - out[j]; +inf at j = K
    state: AbstractState
    disjunct_counts: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        return "verified" if self.verified else "unknown"

    @property
    def margin(self) -> float:
        return float(np.min(self.margins))


def propagate(net: Network, region: Box, spec: DomainSpec, stats=None) -> AbstractState:
    """Push ``region`` through every layer of ``net`` in the given domain."""
    if region.dim != net.input_dim:
        raise InputError(f"region has dimension {region.dim}, network expects {net.input_dim}")
    state = abstract(region, spec)
    last = len(net.layers) - 1
    for i, layer in enumerate(net.layers):
        t0 = time.perf_counter()
        state = affine(state, layer)
        t1 = time.perf_counter()
        if i < last:
            state = relu(state, spec)
        t2 = time.perf_counter()
        if stats is not None:
            stats["affine"] = stats.get("affine", 0.0) + (t1 - t0)
            if i < last:
                stats["relu"] = stats.get("relu", 0.0) + (t2 - t1)
                stats.setdefault("counts", []).append(
                    len(state.disjuncts) if isinstance(state, PowersetState) else 1)
    return state


def analyze(net: Network, region: Box, K: int, spec: DomainSpec) -> Analysis:
    stats: dict = {}
    state = propagate(net, region, spec, stats)
    margins = np.array([np.inf if j == K else lower_bound_margin(state, K, j)
                        for j in range(net.num_classes)])
    counts = stats.pop("counts", [])
    return Analysis(bool(np.all(margins > 0)), spec, margins, state, counts, stats)
