"""Optimal public signaling to steer Friedkin-Johnsen opinion equilibria."""

from .model import FJInstance, SignalingScheme, make_instance, validate
from .objectives import GSpec, Objective, expected_value
from .optimizer import SolveReport, solve_auto

__all__ = [
    "FJInstance",
    "GSpec",
    "Objective",
    "SignalingScheme",
    "SolveReport",
    "expected_value",
    "make_instance",
    "solve_auto",
    "validate",
]
__version__ = "0.1.0"
