"""Brute-force baselines used to check the optimizers.

Nothing here shares LP-building code with ``optimizer``; only the
simplex solver is common.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import lp
from .errors import InfeasibleGrid, TooLarge, WrongStateCount
from .model import FJInstance, SignalingScheme
from .objectives import eval_objective

GRID_BUDGET = 2000
SUPPORT_STATES_MAX = 10
MAX_LP_VARS = 8
MAX_GRAPH = 20


@dataclass
class GridSpec:
    """Posterior grid ``{k / R : k in N^m, sum k = R}`` plus forced extra points."""

    resolution: int
    extra_points: list = field(default_factory=list)

    def __post_init__(self):
        if self.resolution < 1:
            raise ValueError("grid resolution must be at least 1")
        pts = [np.asarray(p, dtype=float) for p in self.extra_points]
        for p in pts:
            if np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-9:
                raise ValueError(f"extra point {p} is not on the simplex")
        self.extra_points = pts


def default_resolution(m: int) -> int:
    if m <= 1:
        return 1
    fixed = {2: 240, 3: 20, 4: 10}
    if m in fixed:
        return fixed[m]
    r = 1
    while math.comb(r + 1 + m - 1, m - 1) <= GRID_BUDGET:
        r += 1
    return r


def simplex_grid(m: int, resolution: int) -> np.ndarray:
    """All compositions of ``resolution`` into ``m`` parts, scaled to the simplex."""
    rows = []
    for bars in itertools.combinations(range(resolution + m - 1), m - 1):
        prev, parts = -1, []
        for b in bars:
            parts.append(b - prev - 1)
            prev = b
        parts.append(resolution + m - 2 - prev)
        rows.append(parts)
    return np.array(rows, dtype=float).reshape(-1, m) / resolution


def edge_breakpoints(inst: FJInstance) -> list[np.ndarray]:
    """Points on each simplex edge where some agent opinion hits a range endpoint."""
    z = inst.z
    m = inst.m
    out = []
    for i, j in itertools.combinations(range(m), 2):
        for u, agent in enumerate(inst.ranges):
            zi, zj = z[u, i], z[u, j]
            if abs(zj - zi) < 1e-14:
                continue
            for endpoint in {e for rng in agent for e in rng}:
                t = (endpoint - zi) / (zj - zi)  # weight on state j
                if -1e-12 <= t <= 1 + 1e-12:
                    t = min(max(t, 0.0), 1.0)
                    p = np.zeros(m)
                    p[i], p[j] = 1.0 - t, t
                    out.append(p)
    return out


def support_uniform_points(m: int) -> list[np.ndarray]:
    """Uniform posteriors over every nonempty subset of states."""
    out = []
    for size in range(2, m + 1):
        for subset in itertools.combinations(range(m), size):
            p = np.zeros(m)
            p[list(subset)] = 1.0 / size
            out.append(p)
    return out


def default_grid(inst: FJInstance) -> GridSpec:
    extras = []
    if inst.objective.is_range_based:
        extras.extend(edge_breakpoints(inst))
        if 3 <= inst.m <= SUPPORT_STATES_MAX:
            extras.extend(support_uniform_points(inst.m))
    extras.append(inst.prior.copy())
    return GridSpec(default_resolution(inst.m), extras)


def grid_oracle(inst: FJInstance, grid: GridSpec | None = None) -> tuple[float, SignalingScheme]:
    """Best distribution over grid posteriors that averages to the prior.

    Optimizes in the objective's own sense, so for minimized objectives the
    returned value is an upper bound on the optimum rather than a lower one.
    """
    if grid is None:
        grid = default_grid(inst)
    pts = simplex_grid(inst.m, grid.resolution)
    if grid.extra_points:
        pts = np.vstack([pts, np.array(grid.extra_points).reshape(-1, inst.m)])
    pts = np.unique(np.round(pts, 15), axis=0)
    z = inst.z
    values = np.array([eval_objective(inst, z @ p) for p in pts])
    sign = 1.0 if inst.objective.sense == "max" else -1.0
    prob = lp.LPProblem(len(pts), sign * values)
    for t in range(inst.m):
        prob.add(pts[:, t], "=", inst.prior[t])
    sol = lp.solve(prob)
    if not sol.optimal:
        raise InfeasibleGrid(f"prior is not a mixture of the grid posteriors ({sol.status})")
    w = np.clip(sol.x, 0.0, None)
    keep = w > 1e-12
    scheme = SignalingScheme.from_joint((pts[keep] * w[keep, None]).T, inst.prior, drop=0.0)
    return float(values @ w), scheme


def exhaustive_two_signal(inst: FJInstance, step: float = 0.01) -> float:
    """Best pair of posteriors around the prior, scanning a step grid plus range crossings."""
    if inst.m != 2:
        raise WrongStateCount(f"two-signal scan needs 2 states, got {inst.m}")
    q = float(inst.prior[1])
    xs = set(np.round(np.arange(0.0, 1.0 + step / 2, step), 12).tolist()) | {0.0, 1.0, q}
    z = inst.z
    for u, agent in enumerate(inst.ranges):
        lo, hi = z[u]
        if hi == lo:
            continue
        for rng in agent:
            for e in rng:
                x = (e - lo) / (hi - lo)
                if 0.0 <= x <= 1.0:
                    xs.add(float(x))
    xs = np.array(sorted(xs))
    f = np.array([eval_objective(inst, z @ np.array([1.0 - x, x])) for x in xs])
    best = eval_objective(inst, z @ inst.prior)
    left, right = xs <= q, xs >= q
    x1, f1 = xs[left][:, None], f[left][:, None]
    x2, f2 = xs[right][None, :], f[right][None, :]
    width = x2 - x1
    with np.errstate(divide="ignore", invalid="ignore"):
        line = np.where(width > 0, ((x2 - q) * f1 + (q - x1) * f2) / width, -np.inf)
    return float(max(best, line.max()))


def enumerate_lp_vertices(p: lp.LPProblem, tol: float = 1e-9) -> np.ndarray:
    """All basic feasible solutions of a small LP, one per row of the result."""
    n = p.num_vars
    if n > MAX_LP_VARS:
        raise TooLarge(f"{n} variables; vertex enumeration is capped at {MAX_LP_VARS}")
    eq_a, eq_b, le_a, le_b = [], [], [], []
    for a, rel, b in p.constraints:
        if rel == "=":
            eq_a.append(a)
            eq_b.append(b)
        elif rel == "<=":
            le_a.append(a)
            le_b.append(b)
        else:
            le_a.append(-a)
            le_b.append(-b)
    for j in np.flatnonzero(p.nonneg):
        row = np.zeros(n)
        row[j] = -1.0
        le_a.append(row)
        le_b.append(0.0)
    eq_a, eq_b = np.array(eq_a).reshape(-1, n), np.array(eq_b)
    le_a, le_b = np.array(le_a).reshape(-1, n), np.array(le_b)
    # keep a linearly independent subset of the equalities; all are rechecked below
    basis = []
    for i in range(len(eq_b)):
        if np.linalg.matrix_rank(eq_a[basis + [i]]) > len(basis):
            basis.append(i)
    all_eq_a, all_eq_b = eq_a, eq_b
    eq_a, eq_b = eq_a[basis], eq_b[basis]
    need = n - len(eq_b)
    if need < 0 or need > len(le_b):
        return np.zeros((0, n))
    combos = np.array(list(itertools.combinations(range(len(le_b)), need)), dtype=int)
    combos = combos.reshape(len(combos), need)
    mats = np.concatenate([np.broadcast_to(eq_a, (len(combos),) + eq_a.shape), le_a[combos]], axis=1)
    rhs = np.concatenate([np.broadcast_to(eq_b, (len(combos), len(eq_b))), le_b[combos]], axis=1)
    ok = np.abs(np.linalg.det(mats)) > 1e-10
    if not ok.any():
        return np.zeros((0, n))
    xs = np.linalg.solve(mats[ok], rhs[ok][..., None])[..., 0]
    feas = np.all(xs @ le_a.T <= le_b + tol, axis=1)
    if len(all_eq_b):
        feas &= np.all(np.abs(xs @ all_eq_a.T - all_eq_b) <= tol, axis=1)
    xs = xs[feas]
    if not len(xs):
        return xs
    _, idx = np.unique(np.round(xs, 8), axis=0, return_index=True)
    return xs[np.sort(idx)]


def max_independent_set(adjacency) -> tuple[int, frozenset[int]]:
    """Exact maximum independent set by branch and bound (vertices are 0-indexed)."""
    adj = np.asarray(adjacency, dtype=bool)
    n = adj.shape[0]
    if n > MAX_GRAPH:
        raise TooLarge(f"{n} vertices; exact search is capped at {MAX_GRAPH}")
    nbrs = [frozenset(np.flatnonzero(adj[v]).tolist()) - {v} for v in range(n)]
    best: list = [frozenset()]

    def search(chosen: frozenset, candidates: frozenset):
        if len(chosen) + len(candidates) <= len(best[0]):
            return
        if not candidates:
            best[0] = chosen
            return
        # branch on the candidate with most remaining neighbours
        v = max(sorted(candidates), key=lambda x: len(nbrs[x] & candidates))
        search(chosen | {v}, candidates - nbrs[v] - {v})
        if nbrs[v] & candidates:
            search(chosen, candidates - {v})

    search(frozenset(), frozenset(range(n)))
    return len(best[0]), best[0]
