"""Verification policy: features of a search state mapped linearly to decisions.

Both selectors compute ``theta @ features`` and discretize the result:

* domain selector (2 outputs): sign of the first picks interval vs zonotope,
  the second (clipped to [0, 1]) picks the disjunct budget;
* split selector (3 outputs): the first two choose between the longest and the
  most influential dimension, the third (clipped to [0, 1]) places the cut
  between the region center (0) and the candidate point (1).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .attack import Candidate, objective_gradient
from .domains import INTERVAL, ZONOTOPE, DomainSpec
from .errors import InputError, ParseError, PreconditionError, VersionError
from .geometry import Box
from .network import Network

FEATURE_VERSION = 1
NUM_FEATURES = 5
FEATURE_NAMES = ("distance_to_center", "objective", "gradient_norm", "mean_width", "bias")


def featurize(net: Network, region: Box, K: int, cand: Candidate) -> np.ndarray:
    grad = objective_gradient(net, K, cand.x)
    return np.array([
        np.linalg.norm(cand.x - region.center),
        cand.value,
        np.linalg.norm(grad),
        float(np.mean(region.widths)),
        1.0,
    ])


def _zeros(shape):
    return np.zeros(shape)


@dataclass(frozen=True, eq=False)
class PolicyParams:
    theta_domain: np.ndarray = field(default_factory=lambda: _zeros((2, NUM_FEATURES)))
    theta_split: np.ndarray = field(default_factory=lambda: _zeros((3, NUM_FEATURES)))
    feature_version: int = FEATURE_VERSION
    k_max: int = 4
    eta: float = 0.05

    def __post_init__(self):
        td = np.array(self.theta_domain, dtype=np.float64)
        ts = np.array(self.theta_split, dtype=np.float64)
        if td.shape != (2, NUM_FEATURES) or ts.shape != (3, NUM_FEATURES):
            raise InputError(
                f"theta shapes must be (2, {NUM_FEATURES}) and (3, {NUM_FEATURES}), "
                f"got {td.shape} and {ts.shape}")
        if not (np.all(np.isfinite(td)) and np.all(np.isfinite(ts))):
            raise InputError("policy parameters must be finite")
        if self.k_max < 1:
            raise InputError("k_max must be at least 1")
        if not 0 < self.eta < 0.5:
            raise InputError(f"eta must lie in (0, 0.5), got {self.eta}")
        td.setflags(write=False)
        ts.setflags(write=False)
        object.__setattr__(self, "theta_domain", td)
        object.__setattr__(self, "theta_split", ts)

    @classmethod
    def from_vector(cls, theta, **kw) -> "PolicyParams":
        """Inverse of ``to_vector``: 10 domain entries, then 15 split entries."""
        theta = np.asarray(theta, dtype=np.float64).reshape(-1)
        n_dom = 2 * NUM_FEATURES
        if theta.shape[0] != 5 * NUM_FEATURES:
            raise InputError(f"expected {5 * NUM_FEATURES} parameters, got {theta.shape[0]}")
        return cls(theta[:n_dom].reshape(2, -1), theta[n_dom:].reshape(3, -1), **kw)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.theta_domain.ravel(), self.theta_split.ravel()])

    def to_dict(self) -> dict:
        return {
            "feature_version": self.feature_version,
            "theta_domain": self.theta_domain.tolist(),
            "theta_split": self.theta_split.tolist(),
            "k_max": self.k_max,
            "eta": self.eta,
        }

    @classmethod
    def from_dict(cls, data) -> "PolicyParams":
        version = data.get("feature_version")
        if version != FEATURE_VERSION:
            raise VersionError(
                f"policy was built for feature version {version}, this build uses {FEATURE_VERSION}")
        try:
            return cls(data["theta_domain"], data["theta_split"], version,
                       int(data.get("k_max", 4)), float(data.get("eta", 0.05)))
        except KeyError as exc:
            raise ParseError(f"policy file is missing {exc}") from None


def save(params: PolicyParams, path) -> None:
    Path(path).write_text(json.dumps(params.to_dict()) + "\n")


def load(path) -> PolicyParams:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from None
    return PolicyParams.from_dict(data)


def _round_half_up(v: float) -> int:
    return int(math.floor(v + 0.5))


def select_domain(params: PolicyParams, features) -> DomainSpec:
    v = params.theta_domain @ np.asarray(features, dtype=np.float64)
    base = INTERVAL if v[0] < 0 else ZONOTOPE
    k = 1 + _round_half_up(float(np.clip(v[1], 0.0, 1.0)) * (params.k_max - 1))
    return DomainSpec(base, k)


def longest_dim(region: Box) -> int:
    return int(np.argmax(region.widths))


def influence_dim(net: Network, region: Box, K: int) -> int:
    """Dimension with the largest |dF/dx_d| * width_d at the region center."""
    g = objective_gradient(net, K, region.center)
    return int(np.argmax(np.abs(g) * region.widths))


def select_split(params: PolicyParams, features, net: Network, region: Box, K: int,
                 cand: Candidate) -> tuple[int, float]:
    widths = region.widths
    if not np.any(widths > 0):
        raise PreconditionError("region has no positive-width dimension to split")
    u = params.theta_split @ np.asarray(features, dtype=np.float64)
    dim = longest_dim(region) if u[0] >= u[1] else influence_dim(net, region, K)
    if widths[dim] <= 0:
        # influence can point at a degenerate dim when all gradients vanish
        dim = longest_dim(region)
    ratio = float(np.clip(u[2], 0.0, 1.0))
    mid = region.center[dim]
    w = widths[dim]
    c = mid + ratio * (cand.x[dim] - mid)
    c = min(max(c, region.lower[dim] + params.eta * w), region.upper[dim] - params.eta * w)
    return dim, float(c)
