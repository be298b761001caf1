"""Signaling-scheme optimizers.

Convex objectives are solved by one of the two simple schemes.  For
range-based objectives the posterior simplex is split into cells on
which every range-membership status is constant; one signal per cell
and a linear program over the joint probabilities ``x[state, signal]``
gives an exact optimum.  Variants cover two-state instances (a direct
breakpoint search), explicit families of valuable hit sets, and a
per-agent approximation for the general case.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import lp
from .errors import NotBitonic, NotMonotone, TooLarge, WrongObjectiveKind, WrongStateCount
from .model import FJInstance, SignalingScheme, fdg_instance, is_fdg
from .objectives import (
    HitSet,
    Indicator,
    eval_g,
    eval_objective,
    expected_value,
    is_subadditive_kind,
)

log = logging.getLogger(__name__)

BELOW, IN, ABOVE = "below", "in", "above"
STRICT_EPS = 1e-9
TIE_EPS = 1e-12

Constraint = tuple[np.ndarray, str, float]


@dataclass(frozen=True, eq=False)
class Cell:
    """A realizable combination of range statuses and its closed polytope.

    ``constraints`` are linear in the posterior ``p`` (one coefficient per
    state); ``value`` is the objective credited to a signal in this cell.
    """

    indicators: tuple[Indicator, ...]
    statuses: tuple[str, ...]
    value: float
    constraints: tuple[Constraint, ...]

    @property
    def hits(self) -> HitSet:
        return frozenset(ind for ind, s in zip(self.indicators, self.statuses) if s == IN)

    def contains(self, p, tol: float = 1e-9) -> bool:
        p = np.asarray(p, dtype=float)
        for a, rel, b in self.constraints:
            lhs = float(a @ p)
            if rel == "<=" and lhs > b + tol or rel == ">=" and lhs < b - tol:
                return False
        return True


@dataclass(eq=False)
class SolveReport:
    scheme: SignalingScheme
    value: float
    method: str
    cells_or_combos: int
    baselines: tuple[float, float]
    lp_value: float | None = None
    flags: dict = field(default_factory=dict)
    instance: FJInstance | None = None


def _require_range(inst: FJInstance) -> None:
    if not inst.objective.is_range_based:
        raise WrongObjectiveKind(f"method needs a range-based objective, got {inst.objective.kind}")


def no_signal_scheme(inst: FJInstance) -> SignalingScheme:
    return SignalingScheme(np.ones((inst.m, 1)), inst.prior)


def full_revelation_scheme(inst: FJInstance) -> SignalingScheme:
    return SignalingScheme(np.eye(inst.m), inst.prior)


def baselines(inst: FJInstance) -> tuple[float, float]:
    return expected_value(inst, no_signal_scheme(inst)), expected_value(inst, full_revelation_scheme(inst))


def _report(inst, scheme, method, count, lp_value=None, **flags) -> SolveReport:
    return SolveReport(
        scheme=scheme,
        value=expected_value(inst, scheme),
        method=method,
        cells_or_combos=count,
        baselines=baselines(inst),
        lp_value=lp_value,
        flags=flags,
        instance=inst,
    )


def optimize_convex(inst: FJInstance) -> SolveReport:
    """No-signaling minimizes a convex objective; full revelation maximizes it."""
    if not inst.objective.is_convex:
        raise WrongObjectiveKind(f"{inst.objective.kind} is not one of the convex objectives")
    if inst.objective.sense == "min":
        return _report(inst, no_signal_scheme(inst), "convex/no-signal", 1)
    return _report(inst, full_revelation_scheme(inst), "convex/full-revelation", inst.m)


# ---------------------------------------------------------------------------
# cell decomposition


def _status_rows(zrow: np.ndarray, a: float, b: float, status: str) -> list[Constraint]:
    if status == IN:
        return [(zrow, ">=", a), (zrow, "<=", b)]
    if status == BELOW:
        return [(zrow, "<=", a)]
    return [(zrow, ">=", b)]


def _strictly_feasible(m: int, closed: list[Constraint], strict: list[Constraint]) -> bool:
    """Is there a posterior meeting ``closed`` and every ``strict`` row with slack > STRICT_EPS?"""
    prob = lp.LPProblem(m + 1, np.r_[np.zeros(m), 1.0])
    prob.add(np.r_[np.ones(m), 0.0], "=", 1.0)
    prob.add(np.r_[np.zeros(m), 1.0], "<=", 1.0)
    for a, rel, b in closed:
        prob.add(np.r_[a, 0.0], rel, b)
    for a, rel, b in strict:
        # below: z + t <= a ; above: z - t >= b
        prob.add(np.r_[a, 1.0 if rel == "<=" else -1.0], rel, b)
    sol = lp.solve(prob)
    return sol.optimal and (not strict or sol.value > STRICT_EPS)


def enumerate_cells(
    inst: FJInstance,
    indicators: Sequence[Indicator] | None = None,
    value_fn: Callable[[HitSet], float] | None = None,
) -> list[Cell]:
    """Enumerate every realizable status vector over the given ranges.

    Depth-first assignment of Below/In/Above per range, pruning any prefix
    that no posterior realizes.  Below/Above must hold strictly somewhere
    in the cell and In holds on the closed range, so each posterior has
    exactly one canonical status vector.  Returned constraints are the
    closures, which may overlap at boundaries; a boundary posterior gets
    its larger value through the In status of the cell it belongs to.
    """
    if indicators is None:
        _require_range(inst)
        indicators = inst.indicators
    indicators = tuple(indicators)
    if value_fn is None:
        gspec = inst.objective.gspec
        value_fn = lambda hits: eval_g(gspec, hits)  # noqa: E731
    z = inst.z
    m = inst.m
    zmin, zmax = z.min(axis=1), z.max(axis=1)
    cells: list[Cell] = []

    def options(u: int, a: float, b: float):
        """Possible statuses; the flag marks statuses that hold on the whole simplex."""
        out = []
        if zmin[u] < a - STRICT_EPS:
            out.append((BELOW, zmax[u] < a - STRICT_EPS))
        if zmax[u] >= a - lp.FEAS_TOL and zmin[u] <= b + lp.FEAS_TOL:
            out.append((IN, zmin[u] >= a and zmax[u] <= b))
        if zmax[u] > b + STRICT_EPS:
            out.append((ABOVE, zmin[u] > b + STRICT_EPS))
        return out

    def dfs(depth: int, statuses: list[str], closed: list[Constraint], strict: list[Constraint], rows):
        if depth == len(indicators):
            cells.append(Cell(indicators, tuple(statuses), float(value_fn(_hits(statuses))), tuple(rows)))
            return
        u, r = indicators[depth]
        a, b = inst.ranges[u][r]
        opts = options(u, a, b)
        for status, everywhere in opts:
            new_rows = [] if everywhere else _status_rows(z[u], a, b, status)
            if everywhere or len(opts) == 1:
                ok = True
            elif status == IN:
                ok = _strictly_feasible(m, closed + new_rows, strict)
            else:
                ok = _strictly_feasible(m, closed, strict + new_rows)
            if not ok:
                continue
            if status == IN:
                dfs(depth + 1, statuses + [status], closed + new_rows, strict, rows + new_rows)
            else:
                dfs(depth + 1, statuses + [status], closed, strict + new_rows, rows + new_rows)

    def _hits(statuses):
        return frozenset(ind for ind, s in zip(indicators, statuses) if s == IN)

    dfs(0, [], [], [], [])
    return cells


def _cells_master_lp(inst: FJInstance, cells: Sequence[Cell]) -> tuple[np.ndarray, float]:
    """Master LP with one signal per cell; returns the joint matrix and LP optimum.

    Variable ``x[state, i]`` sits at index ``i * m + state``.  A cell row
    ``a . p (rel) b`` becomes ``a . x_i (rel) b * sum(x_i)`` so the
    polytope scales with the signal's mass.
    """
    m, c = inst.m, len(cells)
    nv = m * c
    obj = np.zeros(nv)
    prob = lp.LPProblem(nv, obj)
    for i, cell in enumerate(cells):
        obj[i * m:(i + 1) * m] = cell.value
    prob.objective = obj
    for t in range(m):
        row = np.zeros(nv)
        row[t::m] = 1.0
        prob.add(row, "=", inst.prior[t])
    for i, cell in enumerate(cells):
        for a, rel, b in cell.constraints:
            row = np.zeros(nv)
            row[i * m:(i + 1) * m] = a - b
            prob.add(row, rel, 0.0)
    sol = lp.solve(prob)
    if not sol.optimal:
        raise RuntimeError(f"master LP is {sol.status}; cells do not cover the prior")
    return sol.x.reshape(c, m).T, sol.value


def optimize_constant_rank(inst: FJInstance) -> SolveReport:
    """Exact optimum for a monotone range-based objective via the cell LP."""
    _require_range(inst)
    cells = enumerate_cells(inst)
    joint, lp_value = _cells_master_lp(inst, cells)
    scheme = SignalingScheme.from_joint(joint, inst.prior)
    return _report(inst, scheme, "constant-rank", len(cells), lp_value, rank=inst.full.rank)


# ---------------------------------------------------------------------------
# two states


def two_state_breakpoints(inst: FJInstance) -> np.ndarray:
    """Posterior values ``x = P(state 2)`` where some range status can change.

    Each range ``[a, b]`` of agent ``u`` is hit for ``x`` in the
    (possibly empty) interval where ``z_u(x) = z_u1 + (z_u2 - z_u1) x``
    lies in ``[a, b]``; its clipped endpoints, 0, 1 and the prior are
    the candidates.
    """
    if inst.m != 2:
        raise WrongStateCount(f"two-state method needs 2 states, got {inst.m}")
    z = inst.z
    pts = [0.0, 1.0, float(inst.prior[1])]
    for u, agent in enumerate(inst.ranges):
        z1, z2 = z[u]
        slope = z2 - z1
        if abs(slope) <= TIE_EPS:
            continue
        for a, b in agent:
            lo, hi = sorted(((a - z1) / slope, (b - z1) / slope))
            if lo > 1.0 or hi < 0.0:
                continue
            pts.extend((max(0.0, lo), min(1.0, hi)))
    pts = np.unique(np.clip(pts, 0.0, 1.0))
    keep = np.r_[True, np.diff(pts) > TIE_EPS]
    return pts[keep]


def two_state_value(inst: FJInstance, x: float) -> float:
    return eval_objective(inst, inst.z @ np.array([1.0 - x, x]))


def optimize_two_state(inst: FJInstance) -> SolveReport:
    """Best of no-signaling and every breakpoint pair straddling the prior.

    A pair ``x1 < q < x2`` sends posterior ``x1`` with probability
    ``(x2 - q) / (x2 - x1)`` and ``x2`` otherwise.  Ties go to
    no-signaling, then to the narrowest pair.
    """
    _require_range(inst)
    pts = two_state_breakpoints(inst)
    q = float(inst.prior[1])
    f = np.array([two_state_value(inst, x) for x in pts])
    best_val = two_state_value(inst, q)
    best_pair = None
    left = [i for i, x in enumerate(pts) if x < q - TIE_EPS]
    right = [j for j, x in enumerate(pts) if x > q + TIE_EPS]
    for i in left:
        for j in right:
            x1, x2 = pts[i], pts[j]
            val = ((x2 - q) * f[i] + (q - x1) * f[j]) / (x2 - x1)
            if val > best_val + TIE_EPS or (
                best_pair is not None and val > best_val - TIE_EPS and x2 - x1 < best_pair[1] - best_pair[0]
            ):
                best_val, best_pair = val, (x1, x2)
    if best_pair is None:
        scheme = no_signal_scheme(inst)
    else:
        x1, x2 = best_pair
        w1 = (x2 - q) / (x2 - x1)
        scheme = SignalingScheme.from_posteriors([[1 - x1, x1], [1 - x2, x2]], [w1, 1.0 - w1], inst.prior)
    return _report(inst, scheme, "two-state", len(pts), best_val)


# ---------------------------------------------------------------------------
# explicit families of valuable hit sets

Family = list[tuple[HitSet, float]]


def optimize_nonzero_combinations(inst: FJInstance, family: Iterable[tuple[Iterable[Indicator], float]]) -> SolveReport:
    """LP with one signal per listed hit set plus a zero-value dummy signal.

    The signal for set ``T`` only has to keep each agent of ``T`` inside
    the corresponding range; the dummy signal absorbs the remaining
    probability.  Exact when the family lists every hit set of positive
    value of a monotone set function.
    """
    _require_range(inst)
    fam = [(frozenset(t), float(v)) for t, v in family if v > 0]
    m, c = inst.m, len(fam)
    z = inst.z
    nv = m * (c + 1)
    obj = np.zeros(nv)
    for i, (_, v) in enumerate(fam):
        obj[i * m:(i + 1) * m] = v
    prob = lp.LPProblem(nv, obj)
    for t in range(m):
        row = np.zeros(nv)
        row[t::m] = 1.0
        prob.add(row, "=", inst.prior[t])
    for i, (members, _) in enumerate(fam):
        for u, r in sorted(members):
            a, b = inst.ranges[u][r]
            for bound, rel in ((a, ">="), (b, "<=")):
                row = np.zeros(nv)
                row[i * m:(i + 1) * m] = z[u] - bound
                prob.add(row, rel, 0.0)
    sol = lp.solve(prob)
    if not sol.optimal:
        raise RuntimeError(f"combination LP is {sol.status}")
    scheme = SignalingScheme.from_joint(sol.x.reshape(c + 1, m).T, inst.prior)
    return _report(inst, scheme, "nonzero-combinations", c, sol.value)


def full_family(inst: FJInstance, max_ranges: int = 16) -> Family:
    """Every set of range indicators with positive value (exponential in ``k``)."""
    _require_range(inst)
    inds = inst.indicators
    if len(inds) > max_ranges:
        raise TooLarge(f"{len(inds)} ranges; full family enumeration capped at {max_ranges}")
    g = inst.objective.gspec
    out = []
    for size in range(len(inds) + 1):
        for combo in itertools.combinations(inds, size):
            t = frozenset(combo)
            v = eval_g(g, t)
            if v > 0:
                out.append((t, v))
    return out


def cell_family(inst: FJInstance) -> Family:
    return [(c.hits, c.value) for c in enumerate_cells(inst) if c.value > 0]


def _threshold_ranges(inst: FJInstance, error) -> np.ndarray:
    lows = []
    for u, agent in enumerate(inst.ranges):
        if len(agent) != 1 or abs(agent[0][1] - 1.0) > TIE_EPS:
            raise error(f"agent {u} must have exactly one range of the form [a, 1]")
        lows.append(agent[0][0])
    return np.array(lows)


def _family_from_sets(inst: FJInstance, sets: Iterable[frozenset[int]]) -> Family:
    g = inst.objective.gspec
    out, seen = [], set()
    for agents in sets:
        t = frozenset((u, 0) for u in agents)
        if t in seen:
            continue
        seen.add(t)
        v = eval_g(g, t)
        if v > 0:
            out.append((t, v))
    return out


def _ordered(rows: np.ndarray, decreasing: bool) -> bool:
    if rows.shape[0] < 2:
        return True
    d = np.diff(rows, axis=0)
    return bool(np.all(d <= TIE_EPS)) if decreasing else bool(np.all(d >= -TIE_EPS))


def build_monotone_family(inst: FJInstance) -> Family:
    """Prefix hit sets ``{0..j-1}`` when agents are ordered by willingness.

    Requires one range ``[a_u, 1]`` per agent with nondecreasing ``a_u``
    and rows of ``Z`` that are pointwise nonincreasing.
    """
    _require_range(inst)
    lows = _threshold_ranges(inst, NotMonotone)
    if not _ordered(lows[:, None], decreasing=False):
        raise NotMonotone("range thresholds must be nondecreasing in agent order")
    if not _ordered(inst.z, decreasing=True):
        raise NotMonotone("rows of the full revelation matrix are not pointwise nonincreasing")
    return _family_from_sets(inst, (frozenset(range(j)) for j in range(inst.n + 1)))


def bitonic_pivot(inst: FJInstance) -> int:
    """Largest 1-based pivot ``k`` with rows nonincreasing up to ``k`` and nondecreasing after."""
    lows = _threshold_ranges(inst, NotBitonic)
    z = inst.z
    n = inst.n
    for k in range(n, 0, -1):
        head, tail = slice(0, k), slice(k - 1, n)
        if (
            _ordered(z[head], decreasing=True)
            and _ordered(z[tail], decreasing=False)
            and _ordered(lows[head, None], decreasing=False)
            and _ordered(lows[tail, None], decreasing=True)
        ):
            return k
    raise NotBitonic("no pivot agent splits the rows into a decreasing and an increasing run")


def build_bitonic_family(inst: FJInstance) -> Family:
    """Hit sets ``{0..i-1} | {j..n-1}`` around the pivot, plus all agents."""
    _require_range(inst)
    k = bitonic_pivot(inst)
    n = inst.n
    sets = [frozenset(range(n))]
    for i in range(k):
        for j in range(k, n + 1):
            sets.append(frozenset(range(i)) | frozenset(range(j, n)))
    return _family_from_sets(inst, sets)


# ---------------------------------------------------------------------------
# general case


def approximate_subadditive(inst: FJInstance) -> SolveReport:
    """Best of the per-agent optimal schemes, judged on the full objective.

    For agent ``u`` the objective is restricted to ``u``'s own ranges,
    which only needs cells along the line ``z_u``.  For subadditive set
    functions the winner is within a factor ``n`` of the optimum.
    """
    _require_range(inst)
    g = inst.objective.gspec
    best = None
    total_cells = 0
    for u, agent in enumerate(inst.ranges):
        if not agent:
            continue
        cells = enumerate_cells(inst, [(u, r) for r in range(len(agent))], lambda hits: eval_g(g, hits))
        total_cells += len(cells)
        joint, _ = _cells_master_lp(inst, cells)
        scheme = SignalingScheme.from_joint(joint, inst.prior)
        val = expected_value(inst, scheme)
        if best is None or val > best[0] + TIE_EPS:
            best = (val, scheme, u)
    if best is None:
        best = (expected_value(inst, no_signal_scheme(inst)), no_signal_scheme(inst), None)
    subadditive = is_subadditive_kind(g)
    if not subadditive:
        log.warning("set function is not known to be subadditive; the n-approximation guarantee may not hold")
    return _report(
        inst,
        best[1],
        "approx",
        total_cells,
        approximation=True,
        guarantee_factor=inst.n if subadditive else None,
        subadditive=subadditive,
        agent=best[2],
    )


def solve_auto(inst: FJInstance) -> SolveReport:
    """Pick the cheapest exact method that applies, else the n-approximation."""
    prefix = ""
    if is_fdg(inst):
        inst = fdg_instance(inst)
        prefix = "fdg/"
    obj = inst.objective
    if obj.is_convex:
        rep = optimize_convex(inst)
    elif inst.m == 2:
        rep = optimize_two_state(inst)
    elif inst.full.rank <= 4 or inst.k < 10:
        rep = optimize_constant_rank(inst)
    elif obj.gspec.kind == "weighted_sets" and len(obj.gspec.entries) <= 10_000:
        rep = optimize_nonzero_combinations(inst, obj.gspec.entries)
    else:
        rep = None
        for builder, name in ((build_monotone_family, "monotone-family"), (build_bitonic_family, "bitonic-family")):
            try:
                fam = builder(inst)
            except (NotMonotone, NotBitonic):
                continue
            rep = optimize_nonzero_combinations(inst, fam)
            rep.method = name
            break
        if rep is None:
            rep = approximate_subadditive(inst)
    rep.method = prefix + rep.method
    return rep


METHODS = {
    "convex": optimize_convex,
    "two-state": optimize_two_state,
    "constant-rank": optimize_constant_rank,
    "combinations": lambda inst: optimize_nonzero_combinations(inst, _explicit_family(inst)),
    "monotone": lambda inst: _named(optimize_nonzero_combinations(inst, build_monotone_family(inst)), "monotone-family"),
    "bitonic": lambda inst: _named(optimize_nonzero_combinations(inst, build_bitonic_family(inst)), "bitonic-family"),
    "approx": approximate_subadditive,
    "auto": solve_auto,
}


def _named(rep: SolveReport, name: str) -> SolveReport:
    rep.method = name
    return rep


def _explicit_family(inst: FJInstance) -> Family:
    _require_range(inst)
    g = inst.objective.gspec
    if g.kind == "weighted_sets":
        return list(g.entries)
    return full_family(inst)
