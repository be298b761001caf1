"""Two-phase dense-tableau simplex with Bland's rule.

Problems are stated as ``maximize c.x`` subject to rows ``a.x (<=|=|>=) b``
with per-variable sign flags.  Free variables are split into a
difference of two nonnegative ones.  Phase one minimizes the sum of
artificial variables; phase two optimizes the real objective from the
feasible basis phase one leaves behind.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalFailure

FEAS_TOL = 1e-8
PIVOT_EPS = 1e-9
MAX_PIVOTS = 1_000_000
ZERO_SNAP = 1e-11
REFACTOR_EVERY = 25

RELATIONS = ("<=", "=", ">=")


@dataclass
class LPProblem:
    num_vars: int
    objective: np.ndarray
    constraints: list[tuple[np.ndarray, str, float]] = field(default_factory=list)
    nonneg: np.ndarray | None = None

    def __post_init__(self):
        if self.num_vars < 1:
            raise ValueError("an LP needs at least one variable")
        self.objective = np.asarray(self.objective, dtype=float).reshape(-1)
        if self.objective.size != self.num_vars:
            raise ValueError("objective length does not match num_vars")
        if self.nonneg is None:
            self.nonneg = np.ones(self.num_vars, dtype=bool)
        else:
            self.nonneg = np.asarray(self.nonneg, dtype=bool)
        rows = list(self.constraints)
        self.constraints = []
        for coeffs, rel, rhs in rows:
            self.add(coeffs, rel, rhs)

    def add(self, coeffs, rel: str, rhs: float) -> None:
        a = np.asarray(coeffs, dtype=float).reshape(-1)
        if a.size != self.num_vars:
            raise ValueError(f"constraint has {a.size} coefficients, expected {self.num_vars}")
        if rel not in RELATIONS:
            raise ValueError(f"unknown relation {rel!r}")
        if not (np.all(np.isfinite(a)) and np.isfinite(rhs)):
            raise ValueError("constraint has non-finite entries")
        self.constraints.append((a, rel, float(rhs)))

    def residuals(self, x) -> np.ndarray:
        """Constraint violations at ``x`` (zero where satisfied)."""
        x = np.asarray(x, dtype=float)
        out = []
        for a, rel, b in self.constraints:
            lhs = float(a @ x)
            if rel == "<=":
                out.append(max(0.0, lhs - b))
            elif rel == ">=":
                out.append(max(0.0, b - lhs))
            else:
                out.append(abs(lhs - b))
        neg = np.minimum(x[self.nonneg], 0.0)
        return np.concatenate([np.array(out), -neg])


@dataclass(frozen=True, eq=False)
class LPSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None
    value: float
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class _Tableau:
    """Rows ``T[i] = [A_i | b_i]`` in canonical form for ``basis``.

    ``source`` keeps the untouched rows so the tableau can be rebuilt as
    ``B^-1 [A | b]`` every ``REFACTOR_EVERY`` pivots, which stops rounding
    error from piling up on long degenerate runs.
    """

    def __init__(self, t: np.ndarray, basis: list[int]):
        self.t = t
        self.source = t.copy()
        self.basis = basis
        self.pivots = 0

    def keep(self, rows: list[int], cols: list[int]) -> None:
        self.t = np.ascontiguousarray(self.t[rows][:, cols])
        self.source = np.ascontiguousarray(self.source[rows][:, cols])
        self.basis = [self.basis[i] for i in rows]

    def refactor(self) -> None:
        b = self.source[:, self.basis]
        try:
            fresh = np.linalg.solve(b, self.source)
        except np.linalg.LinAlgError:
            return
        if np.all(np.isfinite(fresh)):
            fresh[:, self.basis] = np.eye(len(self.basis))
            rhs = fresh[:, -1]
            rhs[np.abs(rhs) < ZERO_SNAP] = 0.0
            self.t = fresh

    def pivot(self, row: int, col: int) -> None:
        t = self.t
        t[row] /= t[row, col]
        factors = t[:, col].copy()
        factors[row] = 0.0
        t -= np.outer(factors, t[row])
        t[:, col] = 0.0
        t[row, col] = 1.0
        # rounding leaves degenerate right-hand sides slightly negative; without
        # this snap the ratio test can step backwards and Bland's rule cycles
        rhs = t[:, -1]
        rhs[np.abs(rhs) < ZERO_SNAP] = 0.0
        self.basis[row] = col
        self.pivots += 1
        if self.pivots % REFACTOR_EVERY == 0:
            self.refactor()
        if self.pivots > MAX_PIVOTS:
            raise NumericalFailure(f"simplex exceeded {MAX_PIVOTS} pivots")

    def maximize(self, cost: np.ndarray, allowed: np.ndarray) -> str:
        """Bland's-rule primal simplex on the given cost over ``allowed`` columns."""
        while True:
            t = self.t
            cb = cost[self.basis]
            reduced = cost - cb @ t[:, :-1]
            reduced[~allowed] = 0.0
            reduced[self.basis] = 0.0
            candidates = np.flatnonzero(reduced > PIVOT_EPS)
            if candidates.size == 0:
                return "optimal"
            col = int(candidates[0])
            column = t[:, col]
            rows = np.flatnonzero(column > PIVOT_EPS)
            if rows.size == 0:
                return "unbounded"
            ratios = np.maximum(t[rows, -1], 0.0) / column[rows]
            best = ratios.min()
            ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
            row = int(min(ties, key=lambda r: self.basis[r]))
            self.pivot(row, col)


def _standard_form(p: LPProblem):
    """Columns: split structural vars, then slack/surplus, then artificials."""
    col_of = []  # (plus_col, minus_col or -1) per original variable
    ncols = 0
    for j in range(p.num_vars):
        if p.nonneg[j]:
            col_of.append((ncols, -1))
            ncols += 1
        else:
            col_of.append((ncols, ncols + 1))
            ncols += 2
    nstruct = ncols
    rows, rhs, rels = [], [], []
    for a, rel, b in p.constraints:
        row = np.zeros(nstruct)
        for j, (pc, mc) in enumerate(col_of):
            row[pc] = a[j]
            if mc >= 0:
                row[mc] = -a[j]
        if b < 0:
            row, b = -row, -b
            rel = {"<=": ">=", ">=": "<=", "=": "="}[rel]
        rows.append(row)
        rhs.append(b)
        rels.append(rel)
    r = len(rows)
    nslack = sum(rel != "=" for rel in rels)
    nart = sum(rel != "<=" for rel in rels)
    width = nstruct + nslack + nart
    t = np.zeros((r, width + 1))
    basis = [0] * r
    s_col = nstruct
    a_col = nstruct + nslack
    for i, (row, b, rel) in enumerate(zip(rows, rhs, rels)):
        t[i, :nstruct] = row
        t[i, -1] = b
        if rel == "<=":
            t[i, s_col] = 1.0
            basis[i] = s_col
            s_col += 1
        elif rel == ">=":
            t[i, s_col] = -1.0
            s_col += 1
            t[i, a_col] = 1.0
            basis[i] = a_col
            a_col += 1
        else:
            t[i, a_col] = 1.0
            basis[i] = a_col
            a_col += 1
    return t, basis, col_of, nstruct, nstruct + nslack, width


def _phase_one(p: LPProblem):
    """Run phase one; return (tableau, col_of, nstruct, ncols, feasible, sum of artificials)."""
    t, basis, col_of, nstruct, first_art, width = _standard_form(p)
    tab = _Tableau(t, basis)
    is_art = np.zeros(width, dtype=bool)
    is_art[first_art:] = True
    if is_art.any():
        cost = np.where(is_art, -1.0, 0.0)
        tab.maximize(cost, np.ones(width, dtype=bool))
    infeas = float(sum(tab.t[i, -1] for i, c in enumerate(tab.basis) if is_art[c]))
    return tab, col_of, nstruct, first_art, infeas <= FEAS_TOL, infeas


def _drop_artificials(tab: _Tableau, first_art: int) -> None:
    """Pivot zero-level artificials out of the basis; delete redundant rows."""
    keep = []
    for i in range(len(tab.basis)):
        if tab.basis[i] < first_art:
            keep.append(i)
            continue
        row = tab.t[i, :first_art]
        cols = np.flatnonzero(np.abs(row) > PIVOT_EPS)
        if cols.size:
            tab.pivot(i, int(cols[0]))
            keep.append(i)
    tab.keep(keep, list(range(first_art)) + [tab.t.shape[1] - 1])


def solve(p: LPProblem) -> LPSolution:
    """Solve ``p`` exactly up to floating point; deterministic for identical input."""
    tab, col_of, nstruct, first_art, feasible, _ = _phase_one(p)
    if not feasible:
        return LPSolution("infeasible", None, float("nan"), tab.pivots)
    _drop_artificials(tab, first_art)
    cost = np.zeros(first_art)
    for j, (pc, mc) in enumerate(col_of):
        cost[pc] = p.objective[j]
        if mc >= 0:
            cost[mc] = -p.objective[j]
    status = tab.maximize(cost, np.ones(first_art, dtype=bool))
    tab.refactor()
    if status == "unbounded":
        return LPSolution("unbounded", None, float("inf"), tab.pivots)
    xs = np.zeros(first_art)
    for i, c in enumerate(tab.basis):
        xs[c] = tab.t[i, -1]
    x = np.array([xs[pc] - (xs[mc] if mc >= 0 else 0.0) for pc, mc in col_of])
    return LPSolution("optimal", x, float(p.objective @ x), tab.pivots)


def feasible(p: LPProblem) -> bool:
    """True iff the phase-one optimum (total artificial mass) is zero within tolerance."""
    if not p.constraints:
        return True
    return _phase_one(p)[4]
