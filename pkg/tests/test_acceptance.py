"""Acceptance checks, one printed PASS/FAIL line per criterion.

Run ``python tests/test_acceptance.py`` for the bare report, or collect it with
pytest (``pytest -s tests/test_acceptance.py`` shows the lines).
"""
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from charon import fixtures
from charon.attack import PgdConfig, minimize, objective, objective_gradient
from charon.bayesopt import GpModel, expected_improvement
from charon.corpus import gen_corpus, random_network, random_problem
from charon.domains import DomainSpec, analyze, bounds, lower_bound_margin, propagate
from charon.geometry import Box
from charon.trainer import TrainConfig, load_problems, train
from charon.verifier import (NOT_CEX, Falsified, Inconclusive, Verified, VerifierConfig,
                             check_counterexample, depth_bound, verify)

pytestmark = pytest.mark.slow

ETA = 0.05
# (max depth, bound) of every verify run from criteria 1, 3 and 5, checked by criterion 6
DEPTHS: list = []


def report(n, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {n:>2}: {detail}", flush=True)
    return ok


def run_verify(net, region, K, cfg=VerifierConfig()):
    v = verify(net, region, K, cfg=cfg)
    DEPTHS.append((v.stats.max_depth, depth_bound(region, cfg.min_width, ETA)))
    return v


def sound_on_samples(net, region, K, n, seed=0):
    pts = region.sample(np.random.default_rng(seed), n)
    return bool(np.all(objective(net, K, pts) > 0))


def criterion_1():
    net = fixtures.robust_net()
    t0 = time.perf_counter()
    a = run_verify(net, Box([-1], [1]), 1)
    t1 = time.perf_counter()
    b = run_verify(net, Box([-1], [2]), 1)
    t2 = time.perf_counter()
    ok = (isinstance(a, Verified) and isinstance(b, Falsified)
          and net.classify(b.x) != 1 and objective(net, 1, b.x) <= 0
          and t1 - t0 < 1 and t2 - t1 < 1)
    cex = f"x={b.x.tolist()} F={b.margin:.3g}" if isinstance(b, Falsified) else b.status
    return report(1, ok, f"[-1,1] {a.status} ({t1 - t0:.3f}s), [-1,2] {b.status} "
                         f"{cex} ({t2 - t1:.3f}s)")


def criterion_2():
    robust, kinked = fixtures.robust_net(), fixtures.zonotope_net()
    r_int = analyze(robust, Box([-1], [1]), 1, DomainSpec("interval"))
    r_zon = analyze(robust, Box([-1], [1]), 1, DomainSpec("zonotope", 1))
    q = Box([0, 0], [1, 1])
    r_z1 = analyze(kinked, q, fixtures.CLASS_B, DomainSpec("zonotope", 1))
    r_z2 = analyze(kinked, q, fixtures.CLASS_B, DomainSpec("zonotope", 2))
    out = bounds(propagate(robust, Box([-1], [1]), DomainSpec("interval")))
    overlap = bool(out.upper[0] >= out.lower[1])
    ok = (not r_int.verified and overlap and r_zon.verified and r_zon.margin >= 1 - 1e-9
          and not r_z1.verified and r_z2.verified)
    return report(2, ok, f"robust_net interval {r_int.status} (outputs [{out.lower[0]:g},"
                         f"{out.upper[0]:g}] vs [{out.lower[1]:g},{out.upper[1]:g}]), "
                         f"zonotope {r_zon.status} margin {r_zon.margin:.12g}; zonotope_net "
                         f"zonotope:1 {r_z1.status}, zonotope:2 {r_z2.status}")


def criterion_3():
    v = run_verify(fixtures.xor_net(), Box([0.3, 0.3], [0.7, 0.7]), 1,
                   VerifierConfig(max_depth=10))
    ok = isinstance(v, Verified)
    return report(3, ok, f"XOR {v.status} at depth {v.stats.max_depth} with "
                         f"{v.stats.analyze_calls} analyze calls")


SPECS = [DomainSpec("interval")] + [DomainSpec("zonotope", k) for k in range(1, 5)]


def criterion_4(triples=10_000, per_region=20):
    rng = np.random.default_rng(4)
    violations = checked = 0
    i = 0
    while checked < triples:
        spec = SPECS[i % len(SPECS)]
        i += 1
        n_in = int(rng.integers(1, 4))
        net = random_network(rng, n_in, max_width=8, num_layers=int(rng.integers(2, 5)))
        c = rng.uniform(-1, 1, n_in)
        r = rng.uniform(0.0, 0.5, n_in)
        region = Box(c - r, c + r)
        state = propagate(net, region, spec)
        out_box = bounds(state)
        K = int(rng.integers(net.num_classes))
        lbs = np.array([lower_bound_margin(state, K, j) for j in range(net.num_classes)])
        pts = np.vstack([region.sample(rng, per_region - 2), region.lower, region.upper])
        y = net.eval(pts)
        tol = 1e-9 * (1 + np.abs(y))
        bad = ((y < out_box.lower - tol) | (y > out_box.upper + tol)).any(axis=1)
        diff = y[:, [K]] - y
        bad |= (diff < lbs - 1e-9 * (1 + np.abs(diff))).any(axis=1)
        violations += int(bad.sum())
        checked += len(pts)
    return report(4, violations == 0, f"{checked} triples over {len(SPECS)} domains, "
                                      f"{violations} violations")


def criterion_5(count=100, samples=10_000):
    rng = np.random.default_rng(5)
    cfg = VerifierConfig(delta=1e-2, max_depth=60)
    t0 = time.perf_counter()
    tally = {"verified": 0, "falsified": 0, "inconclusive": 0}
    bad = []
    for i in range(count):
        p = random_problem(rng)
        v = run_verify(p.net, p.prop.region, p.prop.label, cfg)
        tally[v.status] += 1
        if isinstance(v, Falsified):
            if (not p.prop.region.contains(v.x)
                    or check_counterexample(p.net, p.prop.label, v.x, cfg.delta) == NOT_CEX
                    or objective(p.net, p.prop.label, v.x) != v.margin):
                bad.append(i)
        elif isinstance(v, Verified):
            if not sound_on_samples(p.net, p.prop.region, p.prop.label, samples, seed=i):
                bad.append(i)
    elapsed = time.perf_counter() - t0
    ok = tally["inconclusive"] == 0 and not bad and elapsed < 300
    return report(5, ok, f"{count} problems: {tally}, bad witnesses/proofs {bad}, "
                         f"{elapsed:.1f}s")


def criterion_6():
    worst = max((d - b for d, b in DEPTHS), default=-math.inf)
    ok = bool(DEPTHS) and all(d <= b for d, b in DEPTHS)
    deepest = max(d for d, _ in DEPTHS) if DEPTHS else None
    return report(6, ok, f"{len(DEPTHS)} verify runs, deepest {deepest}, "
                         f"worst depth minus bound {worst:.2f}")


def kink_free(net, K, x, margin=1e-3):
    if min(np.abs(p).min() for p in net.pre_activations(x)) <= margin:
        return False
    others = np.sort(np.delete(net.eval(x), K))
    return len(others) < 2 or others[-1] - others[-2] > margin


def criterion_7(points=1000, h=1e-6):
    rng = np.random.default_rng(7)
    worst = 0.0
    done = 0
    while done < points:
        n_in = int(rng.integers(1, 5))
        net = random_network(rng, n_in, max_width=8, num_layers=int(rng.integers(2, 5)))
        K = int(rng.integers(net.num_classes))
        x = rng.uniform(-1, 1, n_in)
        if not kink_free(net, K, x):
            continue
        E = np.eye(n_in)
        c = rng.normal(size=net.num_classes)
        g_net = net.gradient(x, c)
        fd_net = np.array([(c @ net.eval(x + h * e) - c @ net.eval(x - h * e)) / (2 * h)
                           for e in E])
        g_obj = objective_gradient(net, K, x)
        fd_obj = np.array([(objective(net, K, x + h * e) - objective(net, K, x - h * e))
                           / (2 * h) for e in E])
        for g, fd in ((g_net, fd_net), (g_obj, fd_obj)):
            scale = max(np.linalg.norm(fd), 1e-8)
            worst = max(worst, np.linalg.norm(g - fd) / scale)
        done += 1
    return report(7, worst < 1e-4, f"{done} kink-free points, worst relative error "
                                    f"{worst:.2e}")


def criterion_8():
    cases = [
        ("robust_net [-1,2]", fixtures.robust_net(), Box([-1], [2]), 1),
        ("robust_net [-1,1]", fixtures.robust_net(), Box([-1], [1]), 1),
        ("xor [0.3,0.7]^2", fixtures.xor_net(), Box([0.3, 0.3], [0.7, 0.7]), 1),
        ("xor [0,1]^2", fixtures.xor_net(), Box([0, 0], [1, 1]), 1),
        ("zonotope_net [0,1]^2", fixtures.zonotope_net(), Box([0, 0], [1, 1]), fixtures.CLASS_B),
    ]
    gaps = {}
    for name, net, region, K in cases:
        if region.dim == 1:
            grid = np.linspace(region.lower[0], region.upper[0], 1_000_000)[:, None]
        else:
            a = np.linspace(region.lower[0], region.upper[0], 1000)
            b = np.linspace(region.lower[1], region.upper[1], 1000)
            grid = np.stack(np.meshgrid(a, b, indexing="ij"), -1).reshape(-1, 2)
        best = float(objective(net, K, grid).min())
        cand = minimize(net, region, K, PgdConfig())
        gaps[name] = cand.value - best
    worst = max(gaps.values())
    detail = ", ".join(f"{k} {v:+.1e}" for k, v in gaps.items())
    return report(8, worst <= 1e-3, f"PGD minus grid minimum: {detail}")


def naive_posterior(X, y, x, variance, ls, noise):
    def k(a, b):
        t = math.sqrt(5) * math.dist(a, b) / ls
        return variance * (1 + t + t * t / 3) * math.exp(-t)
    ym, ys = float(np.mean(y)), max(float(np.std(y)), 1e-9)
    z = (np.asarray(y) - ym) / ys
    n = len(X)
    Kinv = np.linalg.inv(np.array([[k(X[i], X[j]) for j in range(n)] for i in range(n)])
                         + noise * np.eye(n))
    ks = np.array([k(x, X[i]) for i in range(n)])
    var = variance + noise - ks @ Kinv @ ks
    return ks @ Kinv @ z * ys + ym, math.sqrt(max(var, 0.0)) * ys


def criterion_9():
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(20):
        d = int(rng.integers(1, 4))
        n = int(rng.integers(3, 12))
        X = rng.uniform(-1, 1, (n, d))
        y = np.cos(3 * X).sum(axis=1) + rng.normal(scale=0.1, size=n)
        ls = float(rng.choice([0.2, 0.4, 0.8]))
        m = GpModel(X, y, length_scale=ls)
        for x in rng.uniform(-1, 1, (10, d)):
            mu, sd = m.posterior(x[None, :])
            mu_o, sd_o = naive_posterior(X.tolist(), y, x.tolist(), 1.0, ls, m.noise)
            worst = max(worst, abs(mu[0] - mu_o), abs(sd[0] - sd_o))
    ei_zero = expected_improvement(0.5, 0.0, 1.0, 0.01)
    ei_pdf = expected_improvement(1.01, 1.0, 1.0, 0.01)
    phi0 = 1 / math.sqrt(2 * math.pi)
    ok = worst <= 1e-8 and abs(ei_zero) <= 1e-9 and abs(ei_pdf - phi0) <= 1e-9
    return report(9, ok, f"GP max deviation from dense oracle {worst:.1e}; EI(sigma=0, "
                         f"below best)={ei_zero}, EI(z=0)={ei_pdf:.10f}")


def criterion_10(tmp_dir):
    gen_corpus(tmp_dir, 2024, 10)
    problems = load_problems(tmp_dir)
    cfg = TrainConfig(limit=1000, penalty=2, iterations=60, seed=42)
    t0 = time.perf_counter()
    a = train(problems, cfg)
    elapsed = time.perf_counter() - t0
    b = train(problems, cfg)
    same = (a.score == b.score and np.array_equal(a.params.to_vector(), b.params.to_vector())
            and [r["y"] for r in a.history] == [r["y"] for r in b.history])
    ok = a.score >= a.baseline and same and elapsed < 600
    return report(10, ok, f"trained score {a.score:g} vs zero-policy {a.baseline:g} over "
                          f"{len(a.history)} evaluations, repeat identical: {same}, "
                          f"{elapsed:.1f}s per run")


# criterion 6 reads depths recorded by 1, 3 and 5, so keep this order
def test_criterion_1():
    assert criterion_1()


def test_criterion_2():
    assert criterion_2()


def test_criterion_3():
    assert criterion_3()


def test_criterion_4():
    assert criterion_4()


def test_criterion_5():
    assert criterion_5()


def test_criterion_6():
    if len(DEPTHS) < 100:  # run alone: regenerate the depths first
        criterion_1(), criterion_3(), criterion_5()
    assert criterion_6()


def test_criterion_7():
    assert criterion_7()


def test_criterion_8():
    assert criterion_8()


def test_criterion_9():
    assert criterion_9()


def test_criterion_10(tmp_path):
    assert criterion_10(tmp_path)


if __name__ == "__main__":
    import tempfile
    results = [criterion_1(), criterion_2(), criterion_3(), criterion_4(), criterion_5(),
               criterion_6(), criterion_7(), criterion_8(), criterion_9()]
    with tempfile.TemporaryDirectory() as d:
        results.append(criterion_10(Path(d)))
    print(f"{sum(results)}/{len(results)} criteria passed")
    sys.exit(0 if all(results) else 1)
