"""Command-line entry point: ``charon <command> ...``.

Every command writes machine-readable JSON on stdout and a short human summary
on stderr. ``verify`` exits 0 (verified), 1 (falsified) or 2 (inconclusive);
any error exits 3.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, network, policy
from .attack import PgdConfig, minimize
from .corpus import SCHEMA, bench, gen_corpus
from .domains import DomainSpec, analyze
from .errors import CharonError
from .geometry import Property, brightening, load_property, save_property
from .policy import FEATURE_VERSION, PolicyParams
from .trainer import ANALYZE_CALLS, WALL_TIME, TrainConfig, load_problems, train
from .verifier import VerifierConfig, verify

EXIT_CODES = {"verified": 0, "falsified": 1, "inconclusive": 2}
EXIT_ERROR = 3


def _seed(args) -> int:
    env = os.environ.get("CHARON_SEED")
    return int(env) if env else args.seed


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj) + "\n")


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load_pair(args):
    net = network.load(args.network)
    prop = load_property(args.property)
    prop.check_against(net)
    return net, prop


def _pgd(args) -> PgdConfig:
    return PgdConfig(restarts=args.restarts, steps=args.steps, seed=_seed(args))


def _verifier_config(args) -> VerifierConfig:
    return VerifierConfig(delta=args.delta, max_depth=args.max_depth, min_width=args.min_width,
                          pgd=_pgd(args), timeout=args.timeout, threads=args.threads,
                          deterministic=args.deterministic or args.threads == 1)


def cmd_verify(args) -> int:
    net, prop = _load_pair(args)
    params = policy.load(args.policy) if args.policy else PolicyParams()
    verdict = verify(net, prop.region, prop.label, params, _verifier_config(args))
    out = verdict.to_dict()
    if not args.json:
        out.pop("stats", None)
    _emit({"schema": SCHEMA, **out})
    _note(f"{verdict.status}: {verdict.stats.analyze_calls} analyze calls, "
          f"depth {verdict.stats.max_depth}, {verdict.stats.elapsed:.3f}s")
    return EXIT_CODES[verdict.status]


def cmd_attack(args) -> int:
    net, prop = _load_pair(args)
    cand = minimize(net, prop.region, prop.label, _pgd(args))
    _emit({"x": cand.x.tolist(), "objective": cand.value, "is_counterexample": cand.value <= 0})
    _note(f"objective {cand.value:.6g} at restart {cand.restart}")
    return 0


def cmd_analyze(args) -> int:
    net, prop = _load_pair(args)
    spec = DomainSpec.parse(args.domain)
    res = analyze(net, prop.region, prop.label, spec)
    margins = [None if not np.isfinite(m) else float(m) for m in res.margins]
    _emit({"verdict": res.status, "domain": str(spec), "margins": margins,
           "disjuncts": res.disjunct_counts})
    _note(f"{res.status} with {spec} (worst margin {res.margin:.6g})")
    return 0


def cmd_train(args) -> int:
    problems = load_problems(args.problems)
    cfg = TrainConfig(limit=args.limit, penalty=args.penalty, metric=args.metric,
                      verifier=VerifierConfig(delta=args.delta, max_depth=args.max_depth,
                                              pgd=replace(PgdConfig(), seed=_seed(args))),
                      iterations=args.iters, init_points=args.init_points,
                      samples=args.samples, seed=_seed(args), threads=args.threads)
    history = open(args.history, "w") if args.history else None
    try:
        result = train(problems, cfg,
                       callback=(lambda rec: history.write(json.dumps(rec) + "\n"))
                       if history else None)
    finally:
        if history:
            history.close()
    policy.save(result.params, args.out)
    _emit({"score": result.score, "baseline": result.baseline, "policy": str(args.out),
           "evaluations": len(result.history)})
    _note(f"trained on {len(problems)} problems: score {result.score} "
          f"(zero policy {result.baseline})")
    return 0


def _read_vector(text: str) -> np.ndarray:
    path = Path(text)
    if path.exists():
        return np.asarray(json.loads(path.read_text()), dtype=np.float64).reshape(-1)
    return np.array([float(v) for v in text.split(",")])


def cmd_brighten(args) -> int:
    x = _read_vector(args.input)
    region = brightening(x, args.tau)
    if args.label is not None:
        label = args.label
    elif args.network:
        label = int(network.load(args.network).classify(x))
    else:
        raise CharonError("brighten needs --label or --network to pick the class")
    prop = Property(region, label)
    if args.out:
        save_property(prop, args.out)
    _emit(prop.to_dict())
    _note(f"{int(np.sum(region.widths > 0))} of {region.dim} inputs may brighten")
    return 0


def cmd_gen_corpus(args) -> int:
    paths = gen_corpus(args.out, _seed(args), args.count, (args.min_dim, args.max_dim),
                       args.max_width)
    _emit({"problems": [p.name.removesuffix(".net.json") for p in paths], "dir": str(args.out)})
    _note(f"wrote {len(paths)} problems to {args.out}")
    return 0


def cmd_bench(args) -> int:
    problems = load_problems(args.corpus)
    params = policy.load(args.policy) if args.policy else PolicyParams()
    records, summary = bench(problems, params, _verifier_config(args), threads=args.jobs)
    for r in records:
        sys.stdout.write(r.to_json() + "\n")
    _emit({"summary": summary})
    _note(f"{summary['problems']} problems: {summary['solved_pct']:.1f}% solved, "
          f"{summary['inconclusive_pct']:.1f}% inconclusive")
    return 0


def _add_problem_args(p):
    p.add_argument("--network", required=True)
    p.add_argument("--property", required=True)


def _add_pgd_args(p):
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)


def _add_verify_args(p):
    p.add_argument("--policy")
    p.add_argument("--delta", type=float, default=1e-3)
    p.add_argument("--max-depth", type=int, default=40)
    p.add_argument("--min-width", type=float, default=1e-6)
    p.add_argument("--timeout", type=float)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--deterministic", action="store_true",
                   help="sequential depth-first search (bit-reproducible)")
    _add_pgd_args(p)


class _Parser(argparse.ArgumentParser):
    # usage errors must not collide with the inconclusive exit code
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="charon", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version",
                    version=f"charon {__version__} (schema {SCHEMA}, features v{FEATURE_VERSION})")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="prove or refute a robustness property")
    _add_problem_args(p)
    _add_verify_args(p)
    p.add_argument("--json", action="store_true", help="include search statistics")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("attack", help="search for a counterexample only")
    _add_problem_args(p)
    _add_pgd_args(p)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("analyze", help="run one abstract interpretation pass")
    _add_problem_args(p)
    p.add_argument("--domain", default="zonotope",
                   help="interval | zonotope | zonotope:k (k is ignored for interval)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("train", help="learn policy parameters on a problem directory")
    p.add_argument("--problems", required=True)
    p.add_argument("--iters", type=int, default=60)
    p.add_argument("--init-points", type=int, default=8)
    p.add_argument("--samples", type=int, default=2048)
    p.add_argument("--limit", type=float, default=1000)
    p.add_argument("--penalty", type=float, default=2)
    p.add_argument("--metric", choices=[ANALYZE_CALLS, WALL_TIME], default=ANALYZE_CALLS)
    p.add_argument("--delta", type=float, default=1e-3)
    p.add_argument("--max-depth", type=int, default=40)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--history", help="write the optimization history as JSON lines")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("brighten", help="build a brightening-attack property")
    p.add_argument("--input", required=True, help="JSON file with a vector, or comma-separated values")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--label", type=int)
    p.add_argument("--network", help="take the label from this network's prediction")
    p.add_argument("--out")
    p.set_defaults(func=cmd_brighten)

    p = sub.add_parser("gen-corpus", help="generate seeded synthetic problems")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--min-dim", type=int, default=1)
    p.add_argument("--max-dim", type=int, default=3)
    p.add_argument("--max-width", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen_corpus)

    p = sub.add_parser("bench", help="verify every problem of a corpus directory")
    p.add_argument("--corpus", required=True)
    p.add_argument("--jobs", type=int, default=1)
    _add_verify_args(p)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CharonError, OSError, ValueError) as exc:
        _note(f"error: {exc}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
