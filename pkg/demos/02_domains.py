"""
Intervals, zonotopes and powersets
==================================

The same region pushed through the same network gives very different bounds
depending on the abstract domain.
"""

from charon import fixtures
from charon.domains import DomainSpec, analyze, bounds, propagate
from charon.geometry import Box

# intervals lose the correlation between the two outputs, zonotopes keep it
net = fixtures.robust_net()
region = Box([-1], [1])
for spec in (DomainSpec("interval"), DomainSpec("zonotope")):
    out = bounds(propagate(net, region, spec))
    res = analyze(net, region, 1, spec)
    print(f"{str(spec):10s} outputs lo={out.lower} hi={out.upper}  "
          f"{res.status} (margin {res.margin:g})")

# a single zonotope over-approximates the ReLU kink too much here,
# keeping two disjuncts is enough to prove the property
net = fixtures.zonotope_net()
region = Box([0, 0], [1, 1])
for spec in map(DomainSpec.parse, ["interval", "zonotope", "zonotope:2", "zonotope:3"]):
    res = analyze(net, region, fixtures.CLASS_B, spec)
    print(f"{str(spec):10s} {res.status:8s} margin {res.margin:+.3f} "
          f"disjuncts per layer {res.disjunct_counts}")
