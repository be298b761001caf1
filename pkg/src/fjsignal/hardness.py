"""Signaling instances built from graphs, where good signals are independent sets.

Each vertex ``u`` is a stubborn agent and also owns a state ``u``.  The
agent leans towards ``3/4`` in its own state, is pushed to 0 in the states
of its neighbours and sits just below ``1/2`` otherwise.  Every agent
wants an opinion of at least ``1/2``, so the agents any single posterior
satisfies never include two neighbours.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import InputError
from .model import FJInstance, Posterior, SignalingScheme, make_instance
from .objectives import HIT_EPS, Objective

OWN = 0.75
TARGET = 0.5


@dataclass(frozen=True)
class Graph:
    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        norm = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u},{v}) outside 0..{self.n - 1}")
            norm.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(norm))

    @property
    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.n, self.n), dtype=bool)
        for u, v in self.edges:
            adj[u, v] = adj[v, u] = True
        return adj

    def is_independent(self, vertices) -> bool:
        vs = set(vertices)
        return not any(u in vs and v in vs for u, v in self.edges)

    @classmethod
    def path(cls, n: int) -> Graph:
        return cls(n, frozenset((i, i + 1) for i in range(n - 1)))

    @classmethod
    def complete(cls, n: int) -> Graph:
        return cls(n, frozenset((i, j) for i in range(n) for j in range(i + 1, n)))

    @classmethod
    def random(cls, n: int, p: float, rng: np.random.Generator) -> Graph:
        upper = np.triu(rng.random((n, n)) < p, 1)
        return cls(n, frozenset((int(u), int(v)) for u, v in zip(*np.nonzero(upper))))


def read_graph(path) -> Graph:
    """Parse ``n <count>`` followed by one ``u v`` edge per line (0-indexed)."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise InputError(f"cannot read graph file {path}: {exc}") from exc
    n = None
    edges = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if n is None:
                if len(parts) != 2 or parts[0] != "n":
                    raise ValueError("expected header 'n <count>'")
                n = int(parts[1])
                continue
            if len(parts) != 2:
                raise ValueError("expected an edge 'u v'")
            u, v = int(parts[0]), int(parts[1])
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            edges.append((u, v))
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from exc
    if n is None:
        raise InputError(f"{path}: missing header 'n <count>'")
    try:
        return Graph(n, frozenset(edges))
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def write_graph(graph: Graph, path) -> None:
    body = "".join(f"{u} {v}\n" for u, v in sorted(graph.edges))
    Path(path).write_text(f"n {graph.n}\n{body}")


@dataclass(frozen=True, eq=False)
class HardnessInstance:
    graph: Graph
    instance: FJInstance


def background(n: int) -> float:
    return 0.5 - 1.0 / (8 * n)


def generate(graph: Graph) -> HardnessInstance:
    n = graph.n
    if n < 2:
        raise ValueError("the construction needs at least two vertices")
    s = np.full((n, n), background(n))
    np.fill_diagonal(s, OWN)
    adj = graph.adjacency
    s[adj] = 0.0
    inst = make_instance(
        preconceptions=s,
        prior=np.full(n, 1.0 / n),
        ranges=[[(TARGET, 1.0)] for _ in range(n)],
        objective=Objective.range_count(),
    )
    return HardnessInstance(graph, inst)


def signal_for_set(hi: HardnessInstance, vertex_set) -> Posterior:
    """Signal sent exactly in the states of ``vertex_set``: uniform posterior, mass ``|set|/n``."""
    vs = sorted(set(vertex_set))
    if not vs:
        raise ValueError("vertex set must be nonempty")
    n = hi.graph.n
    dist = np.zeros(n)
    dist[vs] = 1.0 / len(vs)
    mass = len(vs) / n
    return Posterior(mass, dist, dist * mass)


def own_set_opinion(n: int, k: int) -> Fraction:
    """Exact opinion of a member of an independent ``k``-set under its uniform signal."""
    return (Fraction(3, 4) + (k - 1) * (Fraction(1, 2) - Fraction(1, 8 * n))) / k


def hit_vertices(hi: HardnessInstance, posterior) -> set[int]:
    dist = posterior.distribution if isinstance(posterior, Posterior) else np.asarray(posterior, dtype=float)
    z = hi.instance.z @ dist
    return set(np.flatnonzero(z >= TARGET - HIT_EPS).tolist())


def verify_correspondence(hi: HardnessInstance, posterior) -> bool:
    """True iff the agents this posterior moves into ``[1/2, 1]`` form an independent set."""
    return hi.graph.is_independent(hit_vertices(hi, posterior))


def verify_batch(hi: HardnessInstance, posteriors) -> np.ndarray:
    """Vectorized ``verify_correspondence`` over the rows of ``posteriors``."""
    p = np.asarray(posteriors, dtype=float)
    hits = (p @ hi.instance.z.T) >= TARGET - HIT_EPS
    ok = np.ones(len(p), dtype=bool)
    for u, v in hi.graph.edges:
        ok &= ~(hits[:, u] & hits[:, v])
    return ok


def witness_scheme(hi: HardnessInstance, vertex_set) -> SignalingScheme:
    """Pool the states of ``vertex_set`` into one signal and the rest into another."""
    n = hi.graph.n
    vs = set(vertex_set)
    phi = np.zeros((n, 2))
    for t in range(n):
        phi[t, 0 if t in vs else 1] = 1.0
    return SignalingScheme(phi, hi.instance.prior)


def witness_bound(n: int, size: int) -> float:
    """Lower bound ``|I|^2 / n`` on the value of ``witness_scheme`` for an independent set."""
    return size * size / n
