"""Synthetic verification problems and a benchmark runner."""
from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import product
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import network
from .attack import objective
from .geometry import Box, Property, save_property
from .network import Network
from .policy import PolicyParams
from .trainer import TrainingProblem
from .verifier import Falsified, Verified, VerifierConfig, verify

log = logging.getLogger(__name__)

SCHEMA = 1


def random_network(rng: np.random.Generator, input_dim: int, max_width: int = 8,
                   num_layers: Optional[int] = None, num_classes: int = 2) -> Network:
    if num_layers is None:
        num_layers = int(rng.integers(2, 5))
    dims = [input_dim] + [int(rng.integers(2, max_width + 1)) for _ in range(num_layers - 1)]
    dims.append(num_classes)
    weights, biases = [], []
    for n_in, n_out in zip(dims[:-1], dims[1:]):
        weights.append(rng.normal(0.0, 1.0 / np.sqrt(n_in), size=(n_out, n_in)))
        biases.append(rng.normal(0.0, 0.5, size=n_out))
    return Network.from_arrays(weights, biases)


def random_property(rng: np.random.Generator, net: Network, radius=(0.05, 0.3)) -> Property:
    center = rng.uniform(-1.0, 1.0, size=net.input_dim)
    r = rng.uniform(*radius, size=net.input_dim)
    label = int(net.classify(center))
    return Property(Box(center - r, center + r), label)


def random_problem(rng: np.random.Generator, dims=(1, 3), max_width: int = 8,
                   layers=(2, 4)) -> TrainingProblem:
    n = int(rng.integers(dims[0], dims[1] + 1))
    net = random_network(rng, n, max_width, int(rng.integers(layers[0], layers[1] + 1)))
    return TrainingProblem(net, random_property(rng, net))


def grid_points(region: Box, total: int = 10_000) -> np.ndarray:
    per_dim = max(2, int(round(total ** (1.0 / region.dim))))
    axes = [np.linspace(l, u, per_dim if u > l else 1) for l, u in zip(region.lower, region.upper)]
    return np.array(list(product(*axes)))


def ground_truth(net: Network, prop: Property, grid: int = 10_000,
                 cfg: VerifierConfig = VerifierConfig(delta=1e-4, max_depth=60)) -> dict:
    """Label a problem by grid refutation, falling back to a high-budget verify run."""
    pts = grid_points(prop.region, grid)
    vals = objective(net, prop.label, pts)
    i = int(np.argmin(vals))
    if vals[i] <= 0:
        return {"expected": "falsified", "witness": pts[i].tolist()}
    verdict = verify(net, prop.region, prop.label, None, cfg)
    if isinstance(verdict, Verified):
        return {"expected": "verified"}
    if isinstance(verdict, Falsified) and verdict.margin <= 0:
        return {"expected": "falsified", "witness": verdict.x.tolist()}
    return {"expected": "unknown"}


def gen_corpus(out_dir, seed: int, count: int, dims=(1, 3), max_width: int = 8) -> list[Path]:
    """Write ``count`` seeded problem pairs into ``out_dir``; returns the network paths."""
    if count < 1:
        raise ValueError("count must be at least 1")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    paths = []
    for i in range(count):
        prob = random_problem(rng, dims, max_width)
        stem = f"p{i:03d}"
        net_path = out_dir / f"{stem}.net.json"
        network.save(prob.net, net_path)
        save_property(prob.prop, out_dir / f"{stem}.prop.json", **ground_truth(prob.net, prob.prop))
        paths.append(net_path)
    return paths


@dataclass
class RunRecord:
    problem: str
    verdict: str
    analyze_calls: int = 0
    seconds: float = 0.0
    depth: int = 0
    domains: dict = field(default_factory=dict)
    seed: int = 0
    error: Optional[str] = None
    schema: int = SCHEMA

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def run_one(problem: TrainingProblem, params: PolicyParams, cfg: VerifierConfig) -> RunRecord:
    try:
        v = verify(problem.net, problem.prop.region, problem.prop.label, params, cfg)
    except Exception as exc:  # recorded, the run continues
        return RunRecord(problem.name, "error", seed=cfg.pgd.seed, error=str(exc))
    s = v.stats
    return RunRecord(problem.name, v.status, s.analyze_calls, s.elapsed, s.max_depth,
                     dict(sorted(s.domains.items())), cfg.pgd.seed)


def summarize(records: Sequence[RunRecord]) -> dict:
    n = len(records)
    counts = {k: sum(r.verdict == k for r in records)
              for k in ("verified", "falsified", "inconclusive", "error")}
    pct = (lambda c: 100.0 * c / n) if n else (lambda c: 0.0)
    return {
        "schema": SCHEMA,
        "problems": n,
        **counts,
        "solved_pct": pct(counts["verified"] + counts["falsified"]),
        "verified_pct": pct(counts["verified"]),
        "falsified_pct": pct(counts["falsified"]),
        "inconclusive_pct": pct(counts["inconclusive"]),
        "total_analyze_calls": sum(r.analyze_calls for r in records),
        "total_seconds": sum(r.seconds for r in records),
    }


def bench(problems: Sequence[TrainingProblem], params: PolicyParams,
          cfg: VerifierConfig = VerifierConfig(), threads: int = 1) -> tuple[list, dict]:
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            records = list(pool.map(lambda p: run_one(p, params, cfg), problems))
    else:
        records = [run_one(p, params, cfg) for p in problems]
    records.sort(key=lambda r: r.problem)
    return records, summarize(records)
