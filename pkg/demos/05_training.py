"""
Learning a verification policy
==============================

Train the domain and split selectors on ten random problems with wide input
boxes, then compare against the all-zero policy on held-out problems.

Ten problems are a small training set. The learned weights fit them well but
can do much worse than the zero policy on problems they have not seen, so
always check a held-out set before shipping a policy.
"""

import numpy as np

from charon.corpus import bench, random_network
from charon.geometry import Box, Property
from charon.policy import PolicyParams
from charon.trainer import TrainConfig, TrainingProblem, train
from charon.verifier import VerifierConfig


def wide_problems(rng, count, prefix):
    out = []
    for i in range(count):
        d = int(rng.integers(2, 4))
        net = random_network(rng, d, max_width=8)
        c = rng.uniform(-1, 1, d)
        r = rng.uniform(0.3, 0.8, d)
        out.append(TrainingProblem(net, Property(Box(c - r, c + r), net.classify(c)),
                                   f"{prefix}{i:02d}"))
    return out


rng = np.random.default_rng(3)
train_set = wide_problems(rng, 10, "train")
held_out = wide_problems(rng, 20, "test")

vcfg = VerifierConfig(delta=1e-2, max_depth=60)
cfg = TrainConfig(limit=200, iterations=30, verifier=vcfg, seed=1)
res = train(train_set, cfg, callback=lambda r: print(f"  eval {r['iter']:2d}  score {r['y']:8.1f}"
                                                      f"  best {r['incumbent']:8.1f}"))
print("zero policy score", res.baseline, "trained score", res.score)
print("domain weights\n", res.params.theta_domain.round(2))

for name, params in (("zero", PolicyParams()), ("trained", res.params)):
    _, summary = bench(held_out, params, vcfg)
    print(f"{name:8s} held-out: {summary['solved_pct']:.0f}% solved, "
          f"{summary['total_analyze_calls']} analyze calls")
