"""Random instance generators and exact reference computations for the tests."""

from __future__ import annotations

from fractions import Fraction
from math import lcm

import numpy as np

from fjsignal import lp
from fjsignal.model import FJInstance, SignalingScheme, make_instance
from fjsignal.objectives import Objective

CONVEX_FACTORIES = {
    "norm_distance": lambda rng, n: Objective.norm_distance(rng.random(n), p=rng.choice([1, 2, 3, np.inf])),
    "polarization": lambda rng, n: Objective.polarization(),
    "disagreement": lambda rng, n: Objective.disagreement(),
    "max_polarization": lambda rng, n: Objective.max_polarization(),
    "max_disagreement": lambda rng, n: Objective.max_disagreement(),
}

# denominators whose lcm divides 840
NICE_DENOMS = [1, 2, 3, 4, 5, 6, 7, 8, 10, 12, 14, 15, 20]


def random_stochastic(rng, n: int, positive: bool = False) -> np.ndarray:
    a = rng.dirichlet(np.ones(n), size=n)
    if not positive:
        a *= rng.random((n, n)) < 0.7
        a[np.arange(n), rng.integers(0, n, n)] += 1e-3
        a /= a.sum(axis=1, keepdims=True)
    return a


def random_ranges(rng, n: int, max_per_agent: int = 2):
    out = []
    for _ in range(n):
        agent = []
        for _ in range(rng.integers(0, max_per_agent + 1)):
            a, b = sorted(rng.random(2))
            agent.append((float(a), float(b)))
        out.append(agent)
    return out


def random_instance(rng, n: int, m: int, objective=None, ranges=None, lam_max: float = 0.95) -> FJInstance:
    if objective is None:
        objective = Objective.range_count()
    return FJInstance(
        influence=random_stochastic(rng, n),
        susceptibility=rng.random(n) * lam_max,
        preconceptions=rng.random((n, m)),
        prior=rng.dirichlet(np.ones(m)),
        ranges=random_ranges(rng, n) if ranges is None else ranges,
        objective=objective,
    )


def random_scheme(rng, m: int, signals: int | None = None, prior=None) -> SignalingScheme:
    s = int(signals or rng.integers(1, 5))
    phi = rng.dirichlet(np.ones(s) * 0.7, size=m)
    return SignalingScheme(phi, np.full(m, 1.0 / m) if prior is None else prior)


def random_rational(rng, denoms=NICE_DENOMS) -> Fraction:
    d = int(rng.choice(denoms))
    return Fraction(int(rng.integers(0, d + 1)), d)


def random_two_state_rational(rng, n_max: int = 5, k_max: int = 6):
    """Stubborn two-state instance with rational ranges and prior; returns (instance, grid resolution).

    Each agent's opinion is ``x``, ``1 - x`` or a constant, so every
    breakpoint is a range endpoint or its complement and lies on the grid.
    """
    n = int(rng.integers(1, n_max + 1))
    rows, fracs = [], []
    for _ in range(n):
        kind = rng.integers(0, 3)
        if kind == 0:
            rows.append([0.0, 1.0])
        elif kind == 1:
            rows.append([1.0, 0.0])
        else:
            c = random_rational(rng)
            fracs.append(c)
            rows.append([float(c), float(c)])
    k = int(rng.integers(1, k_max + 1))
    ranges = [[] for _ in range(n)]
    for _ in range(k):
        a, b = sorted((random_rational(rng), random_rational(rng)))
        fracs += [a, b]
        ranges[int(rng.integers(0, n))].append((float(a), float(b)))
    q = random_rational(rng)
    while q in (0, 1) and rng.random() < 0.8:
        q = random_rational(rng)
    fracs.append(q)
    inst = make_instance(rows, [float(1 - q), float(q)], ranges, Objective.range_count())
    res = 1
    for f in fracs:
        res = lcm(res, f.denominator)
    return inst, min(res, 840)


def exact_equilibrium(influence, susceptibility, s) -> list[Fraction]:
    """Solve ``(I - diag(lam) A) z = (1 - lam) s`` in exact rational arithmetic."""
    a = [[Fraction(x).limit_denominator(10**6) for x in row] for row in influence]
    lam = [Fraction(x).limit_denominator(10**6) for x in susceptibility]
    rhs = [(1 - l) * Fraction(x).limit_denominator(10**6) for l, x in zip(lam, s)]
    n = len(a)
    m = [[(1 if i == j else 0) - lam[i] * a[i][j] for j in range(n)] + [rhs[i]] for i in range(n)]
    for c in range(n):
        p = next(r for r in range(c, n) if m[r][c] != 0)
        m[c], m[p] = m[p], m[c]
        piv = m[c][c]
        m[c] = [x / piv for x in m[c]]
        for r in range(n):
            if r != c and m[r][c] != 0:
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return [m[i][n] for i in range(n)]


def strict_status(z: float, a: float, b: float, tol: float = 1e-12) -> str:
    if z < a - tol:
        return "below"
    if z > b + tol:
        return "above"
    return "in"


def random_bounded_lp(rng, n: int) -> lp.LPProblem:
    """Box-bounded LP that is feasible at a random interior point."""
    x0 = rng.random(n)
    p = lp.LPProblem(n, rng.standard_normal(n))
    for j in range(n):
        row = np.zeros(n)
        row[j] = 1.0
        p.add(row, "<=", 1.0 + rng.random())
    for _ in range(rng.integers(0, 4)):
        a = rng.standard_normal(n)
        rel = rng.choice(["<=", ">=", "="], p=[0.5, 0.35, 0.15])
        slack = 0.0 if rel == "=" else rng.random()
        p.add(a, rel, a @ x0 + (slack if rel == "<=" else -slack))
    return p
