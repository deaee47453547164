"""
Bayesian optimization on a toy function
=======================================

GP surrogate with a Matérn 5/2 kernel and expected improvement, maximizing a
bumpy 2-D function.
"""

import numpy as np

from charon.bayesopt import BoConfig, expected_improvement, fit_gp, maximize


def f(x):
    return -np.sum((x - 0.3) ** 2) + 0.1 * np.cos(8 * x).sum()


cfg = BoConfig(lower=[-1, -1], upper=[1, 1], init_points=6, iterations=25, seed=3)
res = maximize(f, cfg)
print("best x", res.x_best, "f =", res.y_best)
print("incumbent trace", np.round([r["incumbent"] for r in res.history], 4))

# the surrogate after the run: mean and spread at a few points
X = np.array([r["x"] for r in res.history])
y = np.array([r["y"] for r in res.history])
gp = fit_gp(X, y)
probe = np.array([[0.3, 0.3], [-0.9, 0.9], [0.0, 0.0]])
mu, sd = gp.posterior(probe)
print("chosen length scale", gp.length_scale)
for p, m, s in zip(probe, mu, sd):
    print(f"  x={p}  mu={m:+.4f}  sd={s:.4f}  EI={expected_improvement(m, s, y.max()):.2e}")
