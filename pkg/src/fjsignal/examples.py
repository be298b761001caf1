"""Small worked instances used by the tests, the docs and the CLI fixtures."""

from __future__ import annotations

import numpy as np

from .model import FJInstance, make_instance
from .objectives import Objective


def two_friends(objective: str = "range") -> FJInstance:
    """Two agents who listen only to each other, half stubborn.

    State 1 favours agent 1 less than state 2 does; with the uniform prior
    the equilibrium rows are ``Z = [[0.1, 0.9], [0.2, 0.8]]``.
    ``objective`` is ``"range"`` (count agents in ``[0.6, 1]``),
    ``"norm"`` (2-norm distance to ``(0.7, 0.7)``, minimized) or
    ``"norm-max"``.
    """
    if objective == "range":
        obj, ranges = Objective.range_count(), [[(0.6, 1.0)], [(0.6, 1.0)]]
    elif objective in ("norm", "norm-max"):
        sense = "min" if objective == "norm" else "max"
        obj, ranges = Objective.norm_distance([0.7, 0.7], p=2, sense=sense), [[], []]
    else:
        raise ValueError(f"unknown objective {objective!r}")
    return FJInstance(
        influence=np.array([[0.0, 1.0], [1.0, 0.0]]),
        susceptibility=np.array([0.5, 0.5]),
        preconceptions=np.array([[0.0, 1.0], [0.3, 0.7]]),
        prior=np.array([0.5, 0.5]),
        ranges=ranges,
        objective=obj,
    )


def four_stubborn(ranges=None) -> FJInstance:
    """Four fully stubborn agents, two states, several ranges each.

    Agents 1-3 hold opinion ``x = P(state 2)``, agent 4 holds ``1 - x``.
    """
    if ranges is None:
        ranges = [
            [(0.0, 0.7), (0.9, 1.0)],
            [(0.0, 0.4), (0.7, 1.0)],
            [(0.3, 0.3), (0.7, 1.0)],
            [(0.0, 0.3)],
        ]
    return make_instance(
        preconceptions=[[0, 1], [0, 1], [0, 1], [1, 0]],
        prior=[0.5, 0.5],
        ranges=ranges,
        objective=Objective.range_count(),
    )


# ranges whose value profile peaks only at x = 0.3 and x = 0.9
FOUR_STUBBORN_SEPARATED = [
    [(0.0, 0.69), (0.9, 1.0)],
    [(0.0, 0.4), (0.7, 1.0)],
    [(0.3, 0.3), (0.7, 1.0)],
    [(0.0, 0.3)],
]
