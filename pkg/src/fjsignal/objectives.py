"""Sender objectives and their evaluation on equilibrium opinion vectors.

Five convex objectives (norm distance, polarization, disagreement and
their max variants) and the range-based family, where the value of an
equilibrium depends only on which agent opinions land in which desired
ranges.  Range indicators are ``(agent, range_index)`` pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, FrozenSet, Iterable, Tuple

import numpy as np

if TYPE_CHECKING:
    from .model import FJInstance, SignalingScheme

HIT_EPS = 1e-9

Indicator = Tuple[int, int]
HitSet = FrozenSet[Indicator]

CONVEX_KINDS = ("norm_distance", "polarization", "disagreement", "max_polarization", "max_disagreement")
RANGE_KIND = "range_based"
EDGE_KINDS = ("disagreement", "max_disagreement")


@dataclass(frozen=True)
class GSpec:
    """Monotone set function over range indicators.

    ``count``: number of distinct agents with at least one hit range.
    ``threshold``: 1 if that count reaches ``tau``, else 0.
    ``weighted_sets``: max value among listed sets contained in the hit set
    (0 if none), which is monotone by construction.
    """

    kind: str
    tau: int = 0
    entries: tuple[tuple[HitSet, float], ...] = ()

    def __post_init__(self):
        if self.kind not in ("count", "threshold", "weighted_sets"):
            raise ValueError(f"unknown set-function kind {self.kind!r}")
        if any(v < 0 for _, v in self.entries):
            raise ValueError("weighted set values must be nonnegative")

    @classmethod
    def count(cls) -> GSpec:
        return cls("count")

    @classmethod
    def threshold(cls, tau: int) -> GSpec:
        return cls("threshold", tau=int(tau))

    @classmethod
    def weighted_sets(cls, entries: Iterable[tuple[Iterable[Indicator], float]]) -> GSpec:
        norm = tuple(
            (frozenset((int(u), int(r)) for u, r in members), float(value)) for members, value in entries
        )
        return cls("weighted_sets", entries=norm)


@dataclass(frozen=True, eq=False)
class Objective:
    kind: str
    sense: str = "max"
    p: float = 2.0
    target: np.ndarray | None = None
    edge_weights: tuple[tuple[int, int, float], ...] | None = None
    gspec: GSpec | None = None

    def __post_init__(self):
        if self.kind not in CONVEX_KINDS + (RANGE_KIND,):
            raise ValueError(f"unknown objective kind {self.kind!r}")
        if self.sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {self.sense!r}")
        if self.kind == "norm_distance":
            if self.target is None:
                raise ValueError("norm_distance needs a target vector")
            object.__setattr__(self, "target", np.asarray(self.target, dtype=float))
            if not (self.p == np.inf or (float(self.p).is_integer() and self.p >= 1)):
                raise ValueError(f"norm order must be a positive integer or inf, got {self.p}")
        if self.kind == RANGE_KIND and self.gspec is None:
            raise ValueError("range_based objective needs a set function")
        if self.edge_weights is not None:
            ew = tuple((int(u), int(v), float(w)) for u, v, w in self.edge_weights)
            if any(w < 0 for _, _, w in ew):
                raise ValueError("edge weights must be nonnegative")
            object.__setattr__(self, "edge_weights", ew)

    @property
    def is_convex(self) -> bool:
        return self.kind in CONVEX_KINDS

    @property
    def is_range_based(self) -> bool:
        return self.kind == RANGE_KIND

    # convenience constructors
    @classmethod
    def norm_distance(cls, target, p=2, sense="min") -> Objective:
        return cls("norm_distance", sense=sense, p=float(p), target=target)

    @classmethod
    def polarization(cls, sense="min") -> Objective:
        return cls("polarization", sense=sense)

    @classmethod
    def disagreement(cls, edge_weights=None, sense="min") -> Objective:
        return cls("disagreement", sense=sense, edge_weights=edge_weights)

    @classmethod
    def max_polarization(cls, sense="min") -> Objective:
        return cls("max_polarization", sense=sense)

    @classmethod
    def max_disagreement(cls, edge_weights=None, sense="min") -> Objective:
        return cls("max_disagreement", sense=sense, edge_weights=edge_weights)

    @classmethod
    def range_count(cls) -> Objective:
        return cls(RANGE_KIND, gspec=GSpec.count())

    @classmethod
    def range_threshold(cls, tau) -> Objective:
        return cls(RANGE_KIND, gspec=GSpec.threshold(tau))

    @classmethod
    def range_weighted(cls, entries) -> Objective:
        return cls(RANGE_KIND, gspec=GSpec.weighted_sets(entries))


def influence_edges(influence: np.ndarray) -> tuple[tuple[int, int, float], ...]:
    """Directed network edges ``(u, v, a_uv)`` for ``u != v`` with positive influence."""
    a = np.asarray(influence, dtype=float)
    return tuple(
        (u, v, float(a[u, v])) for u in range(a.shape[0]) for v in range(a.shape[1]) if u != v and a[u, v] > 0
    )


def resolved_edges(inst: FJInstance) -> tuple[tuple[int, int, float], ...]:
    obj = inst.objective
    if obj.edge_weights is not None:
        return obj.edge_weights
    return influence_edges(inst.influence)


def hit_set(inst: FJInstance, z, eps: float = HIT_EPS) -> HitSet:
    """Indicators ``(u, r)`` whose closed range contains ``z[u]`` (up to ``eps``)."""
    z = np.asarray(z, dtype=float)
    return frozenset(
        (u, r)
        for u, agent_ranges in enumerate(inst.ranges)
        for r, (a, b) in enumerate(agent_ranges)
        if a - eps <= z[u] <= b + eps
    )


def hit_agents(hits: Iterable[Indicator]) -> set[int]:
    return {u for u, _ in hits}


def eval_g(gspec: GSpec, hits: HitSet) -> float:
    if gspec.kind == "count":
        return float(len(hit_agents(hits)))
    if gspec.kind == "threshold":
        return 1.0 if len(hit_agents(hits)) >= gspec.tau else 0.0
    best = 0.0
    for members, value in gspec.entries:
        if value > best and members <= hits:
            best = value
    return best


def is_subadditive_kind(gspec: GSpec) -> bool:
    """True for set functions known to be subadditive (count, singleton weighted sets)."""
    if gspec.kind == "count":
        return True
    if gspec.kind == "weighted_sets":
        return all(len(members) <= 1 for members, _ in gspec.entries)
    return False


def _norm(v: np.ndarray, p: float) -> float:
    if p == np.inf:
        return float(np.max(np.abs(v))) if v.size else 0.0
    return float(np.sum(np.abs(v) ** p) ** (1.0 / p))


def eval_objective(inst: FJInstance, z, eps: float = HIT_EPS) -> float:
    """Objective value of a single equilibrium vector (sense is not applied)."""
    z = np.asarray(z, dtype=float)
    obj = inst.objective
    kind = obj.kind
    if kind == RANGE_KIND:
        return eval_g(obj.gspec, hit_set(inst, z, eps))
    if kind == "norm_distance":
        return _norm(z - obj.target, obj.p)
    if kind == "polarization":
        return float(np.sum((z - z.mean()) ** 2))
    if kind == "max_polarization":
        return float(z.max() - z.min())
    edges = resolved_edges(inst)
    if kind == "disagreement":
        return float(sum(w * (z[u] - z[v]) ** 2 for u, v, w in edges))
    # max_disagreement: maximum over the edges present (positive weight)
    gaps = [abs(z[u] - z[v]) for u, v, w in edges if w > 0]
    return float(max(gaps)) if gaps else 0.0


def expected_value(inst: FJInstance, scheme: SignalingScheme) -> float:
    """Sum over signals of send probability times objective at that signal's equilibrium."""
    z_full = inst.z
    return float(sum(sig.mass * eval_objective(inst, z_full @ sig.distribution) for sig in scheme.signals))


def better(obj: Objective, a: float, b: float) -> bool:
    return a > b if obj.sense == "max" else a < b

