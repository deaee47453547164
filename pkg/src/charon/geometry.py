"""Axis-aligned boxes, robustness properties and region constructors."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError, ParseError, PreconditionError


@dataclass(frozen=True, eq=False)
class Box:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lower, dtype=np.float64).reshape(-1)
        hi = np.array(self.upper, dtype=np.float64).reshape(-1)
        if lo.shape != hi.shape:
            raise InputError(f"bound lengths differ: {lo.shape[0]} vs {hi.shape[0]}")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise InputError("box bounds must be finite")
        if np.any(lo > hi):
            raise InputError("box has lower > upper in some dimension")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def point(cls, x) -> "Box":
        return cls(x, x)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def center(self) -> np.ndarray:
        return (self.lower + self.upper) / 2

    def __eq__(self, other):
        if not isinstance(other, Box):
            return NotImplemented
        return np.array_equal(self.lower, other.lower) and np.array_equal(self.upper, other.upper)

    def __hash__(self):
        return hash((self.lower.tobytes(), self.upper.tobytes()))

    def __repr__(self):
        parts = ", ".join(f"[{l:g}, {u:g}]" for l, u in zip(self.lower, self.upper))
        return f"Box({parts})"

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=np.float64)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def project(self, x) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return self.lower + rng.random((count, self.dim)) * self.widths

    def volume(self) -> float:
        return float(np.prod(self.widths))


def diameter(box: Box) -> float:
    """Largest L2 distance between two points of the box (corner to corner)."""
    return float(np.linalg.norm(box.widths))


def split(box: Box, dim: int, c: float) -> tuple[Box, Box]:
    """Cut ``box`` with the hyperplane ``x[dim] = c``; c must be strictly interior."""
    if not 0 <= dim < box.dim:
        raise PreconditionError(f"split dimension {dim} out of range for a {box.dim}-d box")
    lo, hi = box.lower[dim], box.upper[dim]
    if not lo < c < hi:
        raise PreconditionError(f"split point {c!r} not strictly inside ({lo!r}, {hi!r})")
    left_hi = box.upper.copy()
    left_hi[dim] = c
    right_lo = box.lower.copy()
    right_lo[dim] = c
    return Box(box.lower, left_hi), Box(right_lo, box.upper)


def brightening(x, tau: float) -> Box:
    """Region of a brightening attack: pixels at or above ``tau`` may rise to 1."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if np.any(x < 0) or np.any(x > 1):
        raise InputError("brightening expects pixel values in [0, 1]")
    if not 0 <= tau <= 1:
        raise InputError(f"threshold must lie in [0, 1], got {tau}")
    upper = np.where(x >= tau, 1.0, x)
    return Box(x, upper)


@dataclass(frozen=True)
class Property:
    """Robustness property: every point of ``region`` must be classified ``label``."""

    region: Box
    label: int

    def __post_init__(self):
        if int(self.label) != self.label or self.label < 0:
            raise InputError(f"label must be a non-negative integer, got {self.label!r}")
        object.__setattr__(self, "label", int(self.label))

    def check_against(self, net) -> None:
        if self.region.dim != net.input_dim:
            raise InputError(
                f"property region has dimension {self.region.dim}, network expects {net.input_dim}")
        if self.label >= net.num_classes:
            raise InputError(f"label {self.label} out of range for {net.num_classes} classes")

    def to_dict(self) -> dict:
        return {"lower": self.region.lower.tolist(), "upper": self.region.upper.tolist(),
                "label": self.label}

    @classmethod
    def from_dict(cls, data) -> "Property":
        try:
            return cls(Box(data["lower"], data["upper"]), data["label"])
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed property ({exc!r})") from None
        except InputError as exc:
            raise ParseError(str(exc)) from None


def load_property(path) -> Property:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from None
    return Property.from_dict(data)


def save_property(prop: Property, path, **extra) -> None:
    data = prop.to_dict()
    data.update(extra)
    Path(path).write_text(json.dumps(data) + "\n")
