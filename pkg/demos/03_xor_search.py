"""
Splitting the XOR square
========================

No single abstraction proves XOR on the middle square, so the verifier splits
the input box and proves every piece. The recorded leaves tile the region.
"""

import numpy as np

from charon import fixtures
from charon.geometry import Box
from charon.verifier import VerifierConfig, depth_bound, verify

net = fixtures.xor_net()
region = Box([0.3, 0.3], [0.7, 0.7])

v = verify(net, region, 1, cfg=VerifierConfig(max_depth=10, record_leaves=True))
print(v.status, v.stats.to_dict())
print("depth bound for this box:", round(depth_bound(region, 1e-6, 0.05), 1))

for leaf in v.stats.leaves:
    print(f"  proved [{leaf.lower[0]:.3f},{leaf.upper[0]:.3f}] x "
          f"[{leaf.lower[1]:.3f},{leaf.upper[1]:.3f}]")
print("leaf volume", sum(l.volume() for l in v.stats.leaves), "region volume", region.volume())

# spot check: random points in the box all classify as 1
pts = region.sample(np.random.default_rng(0), 10_000)
print("sampled classes:", np.unique(net.classify(pts)))
