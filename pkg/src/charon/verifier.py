"""Robustness verification by interleaving counterexample search and abstract
interpretation over a recursively split input region.

For each region: search for a point with objective <= delta (a delta-counterexample);
failing that, let the policy choose a domain and try to prove the region; failing
that, let the policy split the region and recurse, left child first. Budget
exhaustion (depth, width, time, analyze calls) yields ``Inconclusive``, never an
unsound answer.
"""
from __future__ import annotations

import logging
import math
import time
from collections import Counter
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import domains
from .attack import PgdConfig, minimize, objective
from .errors import CharonError, InputError, NumericError
from .geometry import Box, split
from .network import Network
from .policy import PolicyParams, featurize, select_domain, select_split

log = logging.getLogger(__name__)

TRUE_CEX = "true-cex"
DELTA_CEX = "delta-cex"
NOT_CEX = "not-cex"


def check_counterexample(net: Network, K: int, x, delta: float) -> str:
    v = objective(net, K, x)
    if v <= 0:
        return TRUE_CEX
    if v <= delta:
        return DELTA_CEX
    return NOT_CEX


@dataclass(frozen=True)
class VerifierConfig:
    delta: float = 1e-3
    max_depth: int = 40
    min_width: float = 1e-6
    pgd: PgdConfig = PgdConfig()
    timeout: Optional[float] = None
    threads: int = 1
    deterministic: bool = True
    max_analyze_calls: Optional[int] = None
    record_leaves: bool = False

    def __post_init__(self):
        if not self.delta > 0:
            raise InputError(f"delta must be strictly positive, got {self.delta}")
        if self.max_depth < 1:
            raise InputError("max_depth must be at least 1")
        if self.min_width < 0:
            raise InputError("min_width must be non-negative")
        if self.threads < 1:
            raise InputError("threads must be at least 1")


@dataclass
class Stats:
    analyze_calls: int = 0
    minimize_calls: int = 0
    regions_proved: int = 0
    splits: int = 0
    max_depth: int = 0
    domains: Counter = field(default_factory=Counter)
    leaves: list = field(default_factory=list)
    elapsed: float = 0.0

    def to_dict(self) -> dict:
        return {
            "analyze_calls": self.analyze_calls,
            "minimize_calls": self.minimize_calls,
            "regions_proved": self.regions_proved,
            "splits": self.splits,
            "max_depth": self.max_depth,
            "domains": dict(sorted(self.domains.items())),
            "elapsed": self.elapsed,
        }


@dataclass
class Verified:
    stats: Stats
    status = "verified"

    @property
    def regions_proved(self) -> int:
        return self.stats.regions_proved

    @property
    def analyze_calls(self) -> int:
        return self.stats.analyze_calls

    def to_dict(self) -> dict:
        return {"verdict": self.status, "regions_proved": self.regions_proved,
                "analyze_calls": self.analyze_calls, "stats": self.stats.to_dict()}


@dataclass
class Falsified:
    x: np.ndarray
    margin: float
    is_delta: bool
    stats: Stats
    status = "falsified"

    def to_dict(self) -> dict:
        return {"verdict": self.status, "x": self.x.tolist(), "margin": self.margin,
                "is_delta": self.is_delta, "stats": self.stats.to_dict()}


@dataclass
class Inconclusive:
    reason: str
    region: Box
    stats: Stats
    status = "inconclusive"

    def to_dict(self) -> dict:
        return {"verdict": self.status, "reason": self.reason,
                "region": {"lower": self.region.lower.tolist(),
                           "upper": self.region.upper.tolist()},
                "stats": self.stats.to_dict()}


Verdict = Union[Verified, Falsified, Inconclusive]


@dataclass
class _Node:
    region: Box
    depth: int


@dataclass
class _Outcome:
    kind: str  # "falsified" | "verified" | "split" | "inconclusive"
    node: _Node
    x: Optional[np.ndarray] = None
    value: float = 0.0
    children: tuple = ()
    reason: str = ""
    spec: Optional[domains.DomainSpec] = None
    analyzed: bool = False


class _Search:
    def __init__(self, net, K, params, cfg):
        self.net = net
        self.K = K
        self.params = params
        self.cfg = cfg
        self.stats = Stats()
        self.deadline = None if cfg.timeout is None else time.monotonic() + cfg.timeout

    def budget_left(self) -> Optional[str]:
        if self.deadline is not None and time.monotonic() > self.deadline:
            return "timeout"
        return None

    def step(self, node: _Node, calls_so_far: int) -> _Outcome:
        """Process one region; pure apart from reading the config."""
        net, K, cfg = self.net, self.K, self.cfg
        region = node.region
        try:
            cand = minimize(net, region, K, cfg.pgd, target=cfg.delta)
            # re-evaluate rather than trusting the optimizer's bookkeeping
            value = objective(net, K, cand.x)
            if value <= cfg.delta and region.contains(cand.x):
                return _Outcome("falsified", node, x=cand.x, value=value)
            feats = featurize(net, region, K, cand)
            spec = select_domain(self.params, feats)
            if cfg.max_analyze_calls is not None and calls_so_far >= cfg.max_analyze_calls:
                return _Outcome("inconclusive", node, reason="analyze-call budget exhausted")
            result = domains.analyze(net, region, K, spec)
            if result.verified:
                return _Outcome("verified", node, spec=spec, analyzed=True)
            if node.depth >= cfg.max_depth:
                return _Outcome("inconclusive", node, reason="max depth reached",
                                spec=spec, analyzed=True)
            dim, c = select_split(self.params, feats, net, region, K, cand)
            if region.widths[dim] < cfg.min_width:
                return _Outcome("inconclusive", node, reason="minimum split width reached",
                                spec=spec, analyzed=True)
            left, right = split(region, dim, c)
        except CharonError:
            raise
        except (ArithmeticError, np.linalg.LinAlgError) as exc:
            raise NumericError(f"numeric failure on region {region}: {exc}", context=region) from exc
        children = (_Node(left, node.depth + 1), _Node(right, node.depth + 1))
        return _Outcome("split", node, children=children, spec=spec, analyzed=True)

    def record(self, out: _Outcome) -> None:
        s = self.stats
        s.minimize_calls += 1
        s.max_depth = max(s.max_depth, out.node.depth)
        if out.analyzed:
            s.analyze_calls += 1
            s.domains[str(out.spec)] += 1
        if out.kind == "verified":
            s.regions_proved += 1
            if self.cfg.record_leaves:
                s.leaves.append(out.node.region)
        elif out.kind == "split":
            s.splits += 1

    def finish(self, out: _Outcome) -> Verdict:
        if out.kind == "falsified":
            return Falsified(np.asarray(out.x), float(out.value), bool(out.value > 0), self.stats)
        return Inconclusive(out.reason, out.node.region, self.stats)

    def run_sequential(self, root: _Node) -> Verdict:
        stack = [root]
        while stack:
            node = stack.pop()
            reason = self.budget_left()
            if reason:
                return Inconclusive(reason, node.region, self.stats)
            out = self.step(node, self.stats.analyze_calls)
            self.record(out)
            if out.kind == "split":
                stack.append(out.children[1])
                stack.append(out.children[0])
            elif out.kind != "verified":
                return self.finish(out)
        return Verified(self.stats)

    def run_parallel(self, root: _Node) -> Verdict:
        with ThreadPoolExecutor(max_workers=self.cfg.threads) as pool:
            pending = {pool.submit(self.step, root, 0)}
            while pending:
                done, pending = wait(pending, return_when=FIRST_COMPLETED)
                for fut in done:
                    out = fut.result()
                    self.record(out)
                    if out.kind == "split":
                        for child in out.children:
                            reason = self.budget_left()
                            if reason:
                                for f in pending:
                                    f.cancel()
                                return Inconclusive(reason, child.region, self.stats)
                            pending.add(pool.submit(self.step, child, self.stats.analyze_calls))
                    elif out.kind != "verified":
                        for f in pending:
                            f.cancel()
                        return self.finish(out)
        return Verified(self.stats)


def verify(net: Network, region: Box, K: int, params: Optional[PolicyParams] = None,
           cfg: VerifierConfig = VerifierConfig()) -> Verdict:
    """Decide whether every point of ``region`` is classified ``K``.

    Returns ``Verified``, ``Falsified`` (a point whose margin is <= delta) or
    ``Inconclusive`` when a budget runs out.
    """
    if region.dim != net.input_dim:
        raise InputError(f"region has dimension {region.dim}, network expects {net.input_dim}")
    if not 0 <= K < net.num_classes:
        raise InputError(f"class {K} out of range for {net.num_classes} classes")
    params = params if params is not None else PolicyParams()
    search = _Search(net, K, params, cfg)
    t0 = time.perf_counter()
    root = _Node(region, 0)
    if cfg.deterministic or cfg.threads == 1:
        verdict = search.run_sequential(root)
    else:
        verdict = search.run_parallel(root)
    search.stats.elapsed = time.perf_counter() - t0
    log.debug("verify %s K=%d -> %s %s", region, K, verdict.status, search.stats.to_dict())
    return verdict


def depth_bound(region: Box, min_width: float, eta: float = 0.05) -> float:
    """Recursion depth allowed by the per-split shrink factor and width floor."""
    w = float(np.max(region.widths))
    if w <= min_width or min_width <= 0:
        return 1.0
    return math.log(w / min_width) / math.log(1 / (1 - eta)) + 1
