"""Feed-forward ReLU networks: evaluation, gradients and JSON (de)serialization.

A network is a list of affine layers ``y = W x + b`` with ReLU applied after
every layer except the last. All arithmetic is float64.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InputError, ParseError


@dataclass(frozen=True)
class AffineLayer:
    weights: np.ndarray  # (out_dim, in_dim)
    bias: np.ndarray  # (out_dim,)

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        b = np.array(self.bias, dtype=np.float64).reshape(-1)
        if w.ndim != 2:
            raise InputError(f"weights must be a matrix, got shape {w.shape}")
        if b.shape[0] != w.shape[0]:
            raise InputError(
                f"bias length {b.shape[0]} does not match {w.shape[0]} weight rows")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise InputError("non-finite weight or bias entry")
        w.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


class Network:
    """Immutable dense ReLU network."""

    def __init__(self, layers: Sequence[AffineLayer]):
        layers = tuple(l if isinstance(l, AffineLayer) else AffineLayer(*l) for l in layers)
        if not layers:
            raise InputError("a network needs at least one layer")
        for i in range(1, len(layers)):
            if layers[i].in_dim != layers[i - 1].out_dim:
                raise InputError(
                    f"layer {i} expects {layers[i].in_dim} inputs but layer {i - 1} "
                    f"produces {layers[i - 1].out_dim}")
        if layers[-1].out_dim < 2:
            raise InputError("a classifier needs at least two output classes")
        self.layers = layers

    @classmethod
    def from_arrays(cls, weights, biases) -> "Network":
        return cls([AffineLayer(w, b) for w, b in zip(weights, biases)])

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def num_classes(self) -> int:
        return self.layers[-1].out_dim

    def __repr__(self):
        dims = [self.input_dim] + [l.out_dim for l in self.layers]
        return f"Network({'-'.join(map(str, dims))})"

    def _check_input(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1:] != (self.input_dim,) or x.ndim > 2:
            raise InputError(f"expected input of dimension {self.input_dim}, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise InputError("input contains non-finite values")
        return x

    def eval(self, x) -> np.ndarray:
        """Scores for one input (shape (n,)) or a batch (shape (B, n))."""
        h = self._check_input(x)
        last = len(self.layers) - 1
        for i, layer in enumerate(self.layers):
            h = h @ layer.weights.T + layer.bias
            if i < last:
                h = np.maximum(h, 0.0)
        return h

    __call__ = eval

    def classify(self, x):
        # argmax returns the first maximal index: ties go to the lowest class
        return np.argmax(self.eval(x), axis=-1)

    def eval_with_grad(self, x, out_coeffs) -> tuple[np.ndarray, np.ndarray]:
        """Scores and the gradient of ``out_coeffs . N(x)`` with respect to x.

        Works on a single point or a batch; for a batch ``out_coeffs`` may be a
        single vector or one row per point. The ReLU derivative at 0 is 0.
        """
        h = self._check_input(x)
        masks = []
        last = len(self.layers) - 1
        for i, layer in enumerate(self.layers):
            h = h @ layer.weights.T + layer.bias
            if i < last:
                active = h > 0
                masks.append(active)
                h = np.where(active, h, 0.0)
        g = np.broadcast_to(np.asarray(out_coeffs, dtype=np.float64), h.shape)
        for i in range(last, -1, -1):
            g = g @ self.layers[i].weights
            if i > 0:
                g = g * masks[i - 1]
        return h, g

    def gradient(self, x, out_coeffs) -> np.ndarray:
        return self.eval_with_grad(x, out_coeffs)[1]

    def pre_activations(self, x) -> list[np.ndarray]:
        """Pre-ReLU values of every hidden layer (used to detect kinks)."""
        h = self._check_input(x)
        out = []
        for layer in self.layers[:-1]:
            h = h @ layer.weights.T + layer.bias
            out.append(h)
            h = np.maximum(h, 0.0)
        return out

    # -- serialization -------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "layers": [{"weights": l.weights.tolist(), "bias": l.bias.tolist()}
                       for l in self.layers],
        }

    @classmethod
    def from_dict(cls, data) -> "Network":
        if not isinstance(data, dict) or "layers" not in data:
            raise ParseError("expected an object with a 'layers' list")
        layers_raw = data["layers"]
        if not isinstance(layers_raw, list) or not layers_raw:
            raise ParseError("'layers' must be a non-empty list")
        expected_in = data.get("input_dim")
        layers = []
        for i, raw in enumerate(layers_raw):
            try:
                w = np.array(raw["weights"], dtype=np.float64)
                b = np.array(raw["bias"], dtype=np.float64)
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"malformed layer ({exc})", layer=i) from None
            if w.ndim != 2 or b.ndim != 1:
                raise ParseError(
                    f"weights must be a matrix and bias a vector, got {w.shape} and {b.shape}",
                    layer=i)
            if b.shape[0] != w.shape[0]:
                raise ParseError(
                    f"bias has length {b.shape[0]} but weights have {w.shape[0]} rows", layer=i)
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ParseError("non-finite entry", layer=i)
            if expected_in is not None and w.shape[1] != expected_in:
                raise ParseError(
                    f"expects {w.shape[1]} inputs, previous output has {expected_in}", layer=i)
            expected_in = w.shape[0]
            layers.append(AffineLayer(w, b))
        if layers[-1].out_dim < 2:
            raise ParseError("last layer must have at least two outputs", layer=len(layers) - 1)
        return cls(layers)


def load(path) -> Network:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from None
    return Network.from_dict(data)


def dumps(net: Network) -> str:
    # json writes floats with repr(), which round-trips float64 exactly
    return json.dumps(net.to_dict())


def save(net: Network, path) -> None:
    Path(path).write_text(dumps(net) + "\n")
