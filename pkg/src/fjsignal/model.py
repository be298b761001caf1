"""Friedkin-Johnsen signaling instances, schemes, and equilibria.

An instance fixes the influence network ``A``, susceptibilities
``lambda``, one preconception per agent and state (matrix ``S``), a prior
over states, desired opinion ranges, and the sender objective.  A public
signal induces a posterior ``p`` over states; agents average their
preconceptions under ``p`` and the FJ dynamics settle at ``Z @ p``, where
``Z = (I - W)^-1 D S`` is the full revelation matrix.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import linalg
from .errors import InvalidScheme, NoConsensus, NotConverged, ZeroMassSignal
from .linalg import RankFactorization
from .objectives import RANGE_KIND, Objective, influence_edges

STOCHASTIC_TOL = 1e-9
RHO_MARGIN = 1e-6
ZERO_MASS = 1e-12
DROP_MASS = 1e-9


def _ranges(ranges) -> tuple[tuple[tuple[float, float], ...], ...]:
    return tuple(tuple((float(a), float(b)) for a, b in agent) for agent in ranges)


@dataclass(frozen=True, eq=False)
class FJInstance:
    influence: np.ndarray
    susceptibility: np.ndarray
    preconceptions: np.ndarray
    prior: np.ndarray
    ranges: tuple[tuple[tuple[float, float], ...], ...]
    objective: Objective

    def __post_init__(self):
        object.__setattr__(self, "influence", np.array(self.influence, dtype=float, ndmin=2))
        object.__setattr__(self, "susceptibility", np.array(self.susceptibility, dtype=float).reshape(-1))
        object.__setattr__(self, "preconceptions", np.array(self.preconceptions, dtype=float, ndmin=2))
        object.__setattr__(self, "prior", np.array(self.prior, dtype=float).reshape(-1))
        object.__setattr__(self, "ranges", _ranges(self.ranges))

    @property
    def n(self) -> int:
        return self.preconceptions.shape[0]

    @property
    def m(self) -> int:
        return self.preconceptions.shape[1]

    @property
    def k(self) -> int:
        return sum(len(r) for r in self.ranges)

    @property
    def indicators(self) -> list[tuple[int, int]]:
        """All ``(agent, range_index)`` pairs in canonical order."""
        return [(u, r) for u, agent in enumerate(self.ranges) for r in range(len(agent))]

    @property
    def W(self) -> np.ndarray:
        return self.susceptibility[:, None] * self.influence

    @property
    def D(self) -> np.ndarray:
        return np.diag(1.0 - self.susceptibility)

    @cached_property
    def propagator(self) -> np.ndarray:
        """``(I - W)^-1 D``: maps a preconception vector to its equilibrium."""
        return linalg.invert(np.eye(self.n) - self.W) @ self.D

    @cached_property
    def full(self) -> FullRevelation:
        return full_revelation(self)

    @property
    def z(self) -> np.ndarray:
        return self.full.z

    def replace(self, **changes) -> FJInstance:
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True, eq=False)
class Posterior:
    mass: float
    distribution: np.ndarray
    joint: np.ndarray


@dataclass(frozen=True, eq=False)
class FullRevelation:
    z: np.ndarray
    factorization: RankFactorization

    @property
    def rank(self) -> int:
        return self.factorization.d


@dataclass(frozen=True, eq=False)
class SignalingScheme:
    """Per-state distributions over signals (``phi`` is states x signals).

    ``signals`` holds the posteriors of signals that are actually sent;
    columns of ``phi`` with zero mass are skipped, and ``columns`` maps
    each entry of ``signals`` back to its column.
    """

    phi: np.ndarray
    prior: np.ndarray
    signals: tuple[Posterior, ...] = field(init=False)
    columns: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        phi = np.array(self.phi, dtype=float, ndmin=2)
        prior = np.array(self.prior, dtype=float).reshape(-1)
        if phi.shape[0] != prior.size:
            raise InvalidScheme(f"phi has {phi.shape[0]} rows but the prior has {prior.size} states")
        if np.any(phi < -STOCHASTIC_TOL):
            raise InvalidScheme("phi has negative entries")
        rows = phi.sum(axis=1)
        bad = np.flatnonzero(np.abs(rows - 1.0) > STOCHASTIC_TOL)
        if bad.size:
            raise InvalidScheme(f"phi row {int(bad[0])} sums to {rows[bad[0]]:.12g}, not 1")
        phi = np.clip(phi, 0.0, None)
        signals, columns = [], []
        for j in range(phi.shape[1]):
            joint = phi[:, j] * prior
            mass = float(joint.sum())
            if mass <= ZERO_MASS:
                continue
            signals.append(Posterior(mass, joint / mass, joint))
            columns.append(j)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "signals", tuple(signals))
        object.__setattr__(self, "columns", tuple(columns))

    @property
    def masses(self) -> np.ndarray:
        return np.array([s.mass for s in self.signals])

    @property
    def posteriors(self) -> np.ndarray:
        """Signals x states matrix of posterior distributions."""
        return np.array([s.distribution for s in self.signals]).reshape(len(self.signals), self.prior.size)

    @property
    def joint(self) -> np.ndarray:
        return self.phi * self.prior[:, None]

    @classmethod
    def from_joint(cls, joint, prior, drop: float = DROP_MASS) -> SignalingScheme:
        """Build a scheme from a states x signals joint-probability matrix.

        Columns with total mass ``<= drop`` are discarded and each state's
        remaining mass is rescaled to a probability distribution.
        """
        x = np.clip(np.array(joint, dtype=float, ndmin=2), 0.0, None)
        prior = np.asarray(prior, dtype=float)
        keep = np.flatnonzero(x.sum(axis=0) > drop)
        if keep.size == 0:
            keep = np.array([int(np.argmax(x.sum(axis=0)))])
        x = x[:, keep]
        rows = x.sum(axis=1)
        phi = np.zeros_like(x)
        pos = rows > 0
        phi[pos] = x[pos] / rows[pos, None]
        phi[~pos, 0] = 1.0
        return cls(phi, prior)

    @classmethod
    def from_posteriors(cls, posteriors, masses, prior) -> SignalingScheme:
        post = np.array(posteriors, dtype=float, ndmin=2)
        w = np.asarray(masses, dtype=float)
        return cls.from_joint((post * w[:, None]).T, prior, drop=0.0)

    def mix(self, other: SignalingScheme, weight: float = 0.5) -> SignalingScheme:
        """Send this scheme's signals with probability ``weight``, else ``other``'s."""
        return SignalingScheme(np.hstack([weight * self.phi, (1.0 - weight) * other.phi]), self.prior)

    def bayes_residual(self) -> float:
        total = sum((s.joint for s in self.signals), np.zeros_like(self.prior))
        return float(np.max(np.abs(total - self.prior)))


@dataclass(frozen=True, eq=False)
class Violation:
    invariant: str
    index: object
    message: str

    def __str__(self) -> str:
        where = "" if self.index is None else f"[{self.index}]"
        return f"{self.invariant}{where}: {self.message}"


def validate(inst: FJInstance) -> list[Violation]:
    """Check every instance invariant; an empty list means the instance is valid."""
    out: list[Violation] = []
    n, m = inst.preconceptions.shape
    a = inst.influence
    if a.shape != (n, n):
        out.append(Violation("influence.shape", None, f"expected {n}x{n}, got {a.shape[0]}x{a.shape[1]}"))
    else:
        for u in range(n):
            if np.any(a[u] < 0):
                out.append(Violation("influence.nonnegative", u, "row has negative entries"))
            if abs(a[u].sum() - 1.0) > STOCHASTIC_TOL:
                out.append(Violation("influence.row_stochastic", u, f"row sums to {a[u].sum():.12g}"))
    lam = inst.susceptibility
    if lam.size != n:
        out.append(Violation("susceptibility.shape", None, f"expected {n} entries, got {lam.size}"))
    else:
        for u in np.flatnonzero((lam < 0) | (lam > 1)):
            out.append(Violation("susceptibility.range", int(u), f"{lam[u]} not in [0,1]"))
    q = inst.prior
    if q.size != m:
        out.append(Violation("prior.shape", None, f"expected {m} entries, got {q.size}"))
    else:
        for t in np.flatnonzero(q < 0):
            out.append(Violation("prior.nonnegative", int(t), f"{q[t]} < 0"))
        if abs(q.sum() - 1.0) > STOCHASTIC_TOL:
            out.append(Violation("prior.sum", None, f"entries sum to {q.sum():.12g}, not 1"))
    s = inst.preconceptions
    for u, t in zip(*np.nonzero((s < 0) | (s > 1) | ~np.isfinite(s))):
        out.append(Violation("preconceptions.range", (int(u), int(t)), f"{s[u, t]} not in [0,1]"))
    if len(inst.ranges) != n:
        out.append(Violation("ranges.shape", None, f"expected range lists for {n} agents, got {len(inst.ranges)}"))
    for u, agent in enumerate(inst.ranges):
        for r, (lo, hi) in enumerate(agent):
            if not (0.0 <= lo <= hi <= 1.0):
                out.append(Violation("ranges.interval", (u, r), f"[{lo}, {hi}] is not a subinterval of [0,1]"))
    out.extend(_objective_violations(inst))
    if a.shape == (n, n) and lam.size == n and not any(v.invariant.startswith("influence") for v in out):
        rho = linalg.spectral_radius_bound(inst.W)
        if rho > 1.0 - RHO_MARGIN:
            out.append(Violation("convergence.spectral_radius", None, f"rho(W) ~ {rho:.9g} >= 1 - {RHO_MARGIN:g}"))
    return out


def _objective_violations(inst: FJInstance) -> list[Violation]:
    obj = inst.objective
    n = inst.n
    out = []
    if obj.kind == "norm_distance" and obj.target.size != n:
        out.append(Violation("objective.target", None, f"target has {obj.target.size} entries, expected {n}"))
    if obj.edge_weights is not None:
        for i, (u, v, _) in enumerate(obj.edge_weights):
            if not (0 <= u < n and 0 <= v < n):
                out.append(Violation("objective.edge", i, f"edge ({u},{v}) references a missing agent"))
    if obj.kind == RANGE_KIND:
        if obj.sense != "max":
            out.append(Violation("objective.sense", None, "range-based objectives can only be maximized"))
        g = obj.gspec
        if g.kind == "weighted_sets":
            for i, (members, _) in enumerate(g.entries):
                for u, r in members:
                    if not (0 <= u < len(inst.ranges) and 0 <= r < len(inst.ranges[u])):
                        out.append(Violation("objective.set_member", i, f"({u},{r}) is not a range of the instance"))
    return out


def posterior_of_signal(inst: FJInstance, phi_column) -> Posterior:
    col = np.asarray(phi_column, dtype=float)
    joint = col * inst.prior
    mass = float(joint.sum())
    if mass <= ZERO_MASS:
        raise ZeroMassSignal("signal is never sent under this prior")
    return Posterior(mass, joint / mass, joint)


def equilibrium(inst: FJInstance, preconception_vector) -> np.ndarray:
    """Fixed point ``(I - W)^-1 D s`` of the FJ dynamics."""
    return inst.propagator @ np.asarray(preconception_vector, dtype=float)


def iterate_dynamics(inst: FJInstance, s, max_rounds: int = 100_000, tol: float = 1e-10):
    """Run simultaneous FJ updates from ``z0 = s``; return ``(z, rounds_used)``.

    Stops once an update moves no opinion by more than ``tol``.  When the
    row sums of ``W`` are below one, it also waits until the contraction
    bound places the iterate within ``10 * tol`` of the fixed point.
    """
    if max_rounds < 1 or tol <= 0:
        raise ValueError("need max_rounds >= 1 and tol > 0")
    s = np.asarray(s, dtype=float)
    w = inst.W
    ds = (1.0 - inst.susceptibility) * s
    contraction = linalg.norm_inf(w)
    z = s.copy()
    for t in range(1, max_rounds + 1):
        nxt = ds + w @ z
        step = float(np.max(np.abs(nxt - z))) if z.size else 0.0
        z = nxt
        if step < tol and (contraction >= 1.0 or step * contraction / (1.0 - contraction) <= 10 * tol):
            return z, t
    raise NotConverged(f"no convergence within {max_rounds} rounds", last_iterate=z, rounds=max_rounds)


def full_revelation(inst: FJInstance) -> FullRevelation:
    z = inst.propagator @ inst.preconceptions
    return FullRevelation(z, linalg.rank_factorize(z))


def signal_equilibrium(inst: FJInstance, posterior) -> np.ndarray:
    dist = posterior.distribution if isinstance(posterior, Posterior) else np.asarray(posterior, dtype=float)
    return inst.z @ dist


def _freeze_edges(inst: FJInstance) -> Objective:
    obj = inst.objective
    if obj.kind in ("disagreement", "max_disagreement") and obj.edge_weights is None:
        return dataclasses.replace(obj, edge_weights=influence_edges(inst.influence))
    return obj


def normalize(inst: FJInstance) -> FJInstance:
    """Equivalent instance with ``W = 0``, ``D = I`` and preconceptions ``Z``.

    The influence matrix of the result is the identity; it has no effect
    once every susceptibility is zero.  Default disagreement edges are
    copied into the objective so they survive the network change.
    """
    n = inst.n
    z = np.clip(inst.z, 0.0, 1.0)
    assert np.allclose(z, inst.z, atol=1e-9), "equilibrium opinions left [0,1]"
    return inst.replace(
        influence=np.eye(n),
        susceptibility=np.zeros(n),
        preconceptions=z,
        objective=_freeze_edges(inst),
    )


@dataclass(frozen=True, eq=False)
class MultiDimInstance:
    """FJ instance with ``q`` issues per agent.

    ``coupling[u]`` is a row-stochastic ``q x q`` matrix: agent ``u``
    updates issue ``h`` from its neighbours' opinions on issue ``g`` with
    weight ``coupling[u][h, g]``.  ``preconceptions`` is indexed
    ``[agent, issue, state]``; ``ranges`` and the objective refer to the
    expanded agents ``u * q + h``.
    """

    influence: np.ndarray
    susceptibility: np.ndarray
    coupling: np.ndarray
    preconceptions: np.ndarray
    prior: np.ndarray
    ranges: tuple
    objective: Objective

    def __post_init__(self):
        object.__setattr__(self, "influence", np.array(self.influence, dtype=float, ndmin=2))
        object.__setattr__(self, "susceptibility", np.array(self.susceptibility, dtype=float).reshape(-1))
        object.__setattr__(self, "preconceptions", np.array(self.preconceptions, dtype=float, ndmin=3))
        n, q, _ = self.preconceptions.shape
        c = np.array(self.coupling, dtype=float)
        if c.ndim == 2:
            c = np.broadcast_to(c, (n, q, q)).copy()
        object.__setattr__(self, "coupling", c)
        object.__setattr__(self, "prior", np.array(self.prior, dtype=float).reshape(-1))

    @property
    def n(self) -> int:
        return self.preconceptions.shape[0]

    @property
    def issues(self) -> int:
        return self.preconceptions.shape[1]


def expand_multidimensional(md: MultiDimInstance) -> FJInstance:
    """One auxiliary agent per (agent, issue) pair, indexed ``u * q + h``."""
    n, q, m = md.preconceptions.shape
    c = md.coupling
    if c.shape != (n, q, q):
        raise ValueError(f"coupling must be {n}x{q}x{q}, got {c.shape}")
    if np.any(np.abs(c.sum(axis=2) - 1.0) > STOCHASTIC_TOL) or np.any(c < 0):
        raise ValueError("each issue-coupling matrix must be row-stochastic")
    big = np.zeros((n * q, n * q))
    for u in range(n):
        # row block of agent u: a_uv * C_u
        big[u * q:(u + 1) * q] = np.kron(md.influence[u][None, :], c[u])
    return FJInstance(
        influence=big,
        susceptibility=np.repeat(md.susceptibility, q),
        preconceptions=md.preconceptions.reshape(n * q, m),
        prior=md.prior,
        ranges=md.ranges,
        objective=md.objective,
    )


FDG_HORIZON = 4096
FDG_TOL = 1e-8


def fdg_reduce(inst: FJInstance) -> tuple[np.ndarray, np.ndarray]:
    """Consensus weights ``pi`` and per-state consensus opinions ``pi @ S``.

    Applies to French-DeGroot instances (every susceptibility is 1).  The
    limit of ``W^t`` is taken from ``W^4096`` computed by squaring, and
    must be stable (``W^8192`` agrees) with identical rows.
    """
    if np.any(np.abs(inst.susceptibility - 1.0) > 1e-12):
        raise NoConsensus("French-DeGroot reduction needs every susceptibility equal to 1")
    w = inst.W
    p = w.copy()
    for _ in range(int(np.log2(FDG_HORIZON))):
        p = p @ p
    if linalg.norm_inf(p @ p - p) > FDG_TOL:
        raise NoConsensus("powers of W do not converge")
    if linalg.norm_inf(p - p[0][None, :]) > FDG_TOL:
        raise NoConsensus("limit of W^t does not have identical rows")
    pi = np.clip(p.mean(axis=0), 0.0, None)
    pi /= pi.sum()
    if linalg.norm_inf(pi @ w - pi) > FDG_TOL:
        raise NoConsensus("consensus weights are not stationary")
    return pi, pi @ inst.preconceptions


def fdg_instance(inst: FJInstance) -> FJInstance:
    """Rank-one normal-form instance equivalent to a consensus-reaching DeGroot instance."""
    _, consensus = fdg_reduce(inst)
    n = inst.n
    return inst.replace(
        influence=np.eye(n),
        susceptibility=np.zeros(n),
        preconceptions=np.tile(consensus, (n, 1)),
        objective=_freeze_edges(inst),
    )


def is_fdg(inst: FJInstance) -> bool:
    return inst.susceptibility.size > 0 and bool(np.all(np.abs(inst.susceptibility - 1.0) <= 1e-12))


def scheme_equilibria(inst: FJInstance, scheme: SignalingScheme) -> np.ndarray:
    """Signals x agents matrix of equilibrium opinions."""
    return scheme.posteriors @ inst.z.T


def make_instance(
    preconceptions: Sequence,
    prior: Sequence,
    ranges: Sequence,
    objective: Objective,
    influence=None,
    susceptibility=None,
) -> FJInstance:
    """Instance with defaults: identity influence and fully stubborn agents."""
    s = np.array(preconceptions, dtype=float, ndmin=2)
    n = s.shape[0]
    return FJInstance(
        influence=np.eye(n) if influence is None else influence,
        susceptibility=np.zeros(n) if susceptibility is None else susceptibility,
        preconceptions=s,
        prior=prior,
        ranges=ranges,
        objective=objective,
    )
