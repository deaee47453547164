"""
Robustness of a tiny network
============================

A one-input, two-class network that is robust on [-1, 1] but not on [-1, 2].
"""

import numpy as np

from charon import fixtures
from charon.attack import minimize, objective
from charon.geometry import Box
from charon.verifier import verify

net = fixtures.robust_net()

# class scores along the input line; class 1 wins while the gap stays positive
xs = np.linspace(-1, 2, 7)[:, None]
for x, s in zip(xs[:, 0], net(xs)):
    print(f"x={x:+.2f}  scores={s}  F={s[1] - s[0]:+.2f}")

# gradient search alone already breaks the wider region
cand = minimize(net, Box([-1], [2]), 1)
print("\nPGD minimum on [-1,2]:", cand.x, "F =", cand.value)

# the full verifier proves the narrow box and refutes the wide one
for region in (Box([-1], [1]), Box([-1], [2])):
    v = verify(net, region, 1)
    print(f"[{region.lower[0]:g},{region.upper[0]:g}] -> {v.status}", v.to_dict())

# a counterexample is just a point; re-check it by plain evaluation
v = verify(net, Box([-1], [2]), 1)
print("re-checked class:", net.classify(v.x), "objective:", objective(net, 1, v.x))
