"""Robustness verification for ReLU networks by counterexample search plus abstract
interpretation, steered by a policy learned with Bayesian optimization."""

__version__ = "0.1.0"

from .network import AffineLayer, Network
from .geometry import Box, Property, brightening, diameter, split
from .domains import DomainSpec, analyze
from .attack import PgdConfig, minimize, objective
from .policy import PolicyParams
from .verifier import (Falsified, Inconclusive, Verified, VerifierConfig,
                       check_counterexample, verify)

__all__ = [
    "AffineLayer", "Network", "Box", "Property", "brightening", "diameter", "split",
    "DomainSpec", "analyze", "PgdConfig", "minimize", "objective", "PolicyParams",
    "Falsified", "Inconclusive", "Verified", "VerifierConfig", "check_counterexample",
    "verify",
]
