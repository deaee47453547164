"""Learning policy parameters by Bayesian optimization over a training corpus.

The score of a parameter vector is minus the total cost over the corpus, where a
problem costs what it consumed (analyze calls or seconds) when solved within the
limit ``t`` and ``p * t`` otherwise.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import network
from .bayesopt import BoConfig, BoResult, maximize
from .errors import InputError
from .geometry import Property, load_property
from .network import Network
from .policy import NUM_FEATURES, PolicyParams
from .verifier import Inconclusive, VerifierConfig, verify

log = logging.getLogger(__name__)

ANALYZE_CALLS = "analyze-calls"
WALL_TIME = "wall-time"
THETA_BOUND = 5.0
NUM_PARAMS = 5 * NUM_FEATURES


@dataclass(frozen=True)
class TrainingProblem:
    net: Network
    prop: Property
    name: str = ""

    def __post_init__(self):
        self.prop.check_against(self.net)

    @classmethod
    def from_files(cls, net_path, prop_path) -> "TrainingProblem":
        name = Path(net_path).name.removesuffix(".net.json")
        return cls(network.load(net_path), load_property(prop_path), name)


def load_problems(directory) -> list[TrainingProblem]:
    """Load every ``<name>.net.json`` / ``<name>.prop.json`` pair, sorted by name."""
    directory = Path(directory)
    problems = []
    for net_path in sorted(directory.glob("*.net.json")):
        prop_path = net_path.with_name(net_path.name.replace(".net.json", ".prop.json"))
        if not prop_path.exists():
            raise InputError(f"{net_path} has no matching property file {prop_path.name}")
        problems.append(TrainingProblem.from_files(net_path, prop_path))
    return problems


@dataclass(frozen=True)
class TrainConfig:
    limit: float = 700.0
    penalty: float = 2.0
    metric: str = ANALYZE_CALLS
    verifier: VerifierConfig = VerifierConfig()
    iterations: int = 60
    init_points: int = 8
    samples: int = 2048
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if not self.limit > 0:
            raise InputError("limit must be positive")
        if self.penalty < 1:
            raise InputError("penalty must be at least 1")
        if self.metric not in (ANALYZE_CALLS, WALL_TIME):
            raise InputError(f"unknown cost metric {self.metric!r}")

    def bo_config(self) -> BoConfig:
        return BoConfig([-THETA_BOUND] * NUM_PARAMS, [THETA_BOUND] * NUM_PARAMS,
                        init_points=self.init_points, iterations=self.iterations,
                        samples=self.samples, seed=self.seed)


def problem_verifier_config(cfg: TrainConfig) -> VerifierConfig:
    if cfg.metric == ANALYZE_CALLS:
        return replace(cfg.verifier, max_analyze_calls=int(cfg.limit), timeout=None)
    return replace(cfg.verifier, timeout=cfg.limit, max_analyze_calls=None)


def cost_from_verdict(verdict, cfg: TrainConfig) -> float:
    used = (verdict.stats.analyze_calls if cfg.metric == ANALYZE_CALLS
            else verdict.stats.elapsed)
    if isinstance(verdict, Inconclusive) or used > cfg.limit:
        return cfg.penalty * cfg.limit
    return float(used)


def score_problem(params: PolicyParams, problem: TrainingProblem, cfg: TrainConfig) -> float:
    verdict = verify(problem.net, problem.prop.region, problem.prop.label, params,
                     problem_verifier_config(cfg))
    return cost_from_verdict(verdict, cfg)


def score_policy(params: PolicyParams, problems: Sequence[TrainingProblem],
                 cfg: TrainConfig) -> float:
    if cfg.threads > 1 and len(problems) > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            costs = list(pool.map(lambda p: score_problem(params, p, cfg), problems))
    else:
        costs = [score_problem(params, p, cfg) for p in problems]
    return -float(sum(costs))


@dataclass
class TrainResult:
    params: PolicyParams
    score: float
    bo: BoResult
    baseline: Optional[float] = None
    history: list = field(default_factory=list)


def train(problems: Sequence[TrainingProblem], cfg: TrainConfig = TrainConfig(),
          callback=None) -> TrainResult:
    if not problems:
        raise InputError("training needs at least one problem")

    def f(theta):
        return score_policy(PolicyParams.from_vector(theta), problems, cfg)

    res = maximize(f, cfg.bo_config(), callback=callback)
    baseline = res.history[0]["y"]  # the all-zero policy is always evaluated first
    log.info("trained policy score %s (zero policy %s)", res.y_best, baseline)
    return TrainResult(PolicyParams.from_vector(res.x_best), res.y_best, res, baseline,
                       res.history)
