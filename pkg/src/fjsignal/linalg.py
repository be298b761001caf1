"""Dense linear algebra helpers.

Matrices are plain 2-D float ``numpy`` arrays. The routines here are
small and explicit on purpose: inversion reports singular pivots instead
of returning garbage, and the rank factorization keeps actual columns of
the input as its basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularMatrix

PIVOT_TOL = 1e-12
RANK_TOL = 1e-9
POWER_ITERATIONS = 200


@dataclass(frozen=True, eq=False)
class RankFactorization:
    """``m == basis @ coefficients`` with ``basis`` of full column rank ``d``."""

    d: int
    basis: np.ndarray
    coefficients: np.ndarray
    pivots: tuple[int, ...] = ()

    def reconstruct(self) -> np.ndarray:
        return self.basis @ self.coefficients


def as_matrix(m) -> np.ndarray:
    a = np.array(m, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def invert(m, pivot_tol: float = PIVOT_TOL) -> np.ndarray:
    """Gauss-Jordan inversion with partial pivoting.

    Raises SingularMatrix when the best available pivot in a column has
    magnitude below ``pivot_tol``.
    """
    a = as_matrix(m)
    n, cols = a.shape
    if n != cols:
        raise ValueError(f"cannot invert a non-square {n}x{cols} matrix")
    aug = np.hstack([a, np.eye(n)])
    for c in range(n):
        r = c + int(np.argmax(np.abs(aug[c:, c])))
        if abs(aug[r, c]) < pivot_tol:
            raise SingularMatrix(f"pivot {aug[r, c]:.3e} below {pivot_tol:g} in column {c}")
        if r != c:
            aug[[c, r]] = aug[[r, c]]
        aug[c] /= aug[c, c]
        col = aug[:, c].copy()
        col[c] = 0.0
        aug -= np.outer(col, aug[c])
    return aug[:, n:]


def solve(m, rhs) -> np.ndarray:
    return invert(m) @ np.asarray(rhs, dtype=float)


def rank_factorize(m, tol: float = RANK_TOL) -> RankFactorization:
    """Row-reduce ``m`` and factor it through its pivot columns.

    The pivot threshold is ``tol`` times the largest absolute entry, so
    the numerical rank does not depend on the overall scale of ``m``.
    """
    a = as_matrix(m)
    rows, cols = a.shape
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    if scale == 0.0:
        return RankFactorization(0, np.zeros((rows, 0)), np.zeros((0, cols)))
    thresh = tol * scale
    r = a.copy()
    pivots: list[int] = []
    row = 0
    for c in range(cols):
        if row == rows:
            break
        p = row + int(np.argmax(np.abs(r[row:, c])))
        if abs(r[p, c]) <= thresh:
            continue
        if p != row:
            r[[row, p]] = r[[p, row]]
        r[row] /= r[row, c]
        col = r[:, c].copy()
        col[row] = 0.0
        r -= np.outer(col, r[row])
        pivots.append(c)
        row += 1
    d = len(pivots)
    return RankFactorization(d, a[:, pivots].copy(), r[:d].copy(), tuple(pivots))


def rank(m, tol: float = RANK_TOL) -> int:
    return rank_factorize(m, tol).d


def spectral_radius_bound(m, iterations: int = POWER_ITERATIONS) -> float:
    """Estimate the spectral radius of a nonnegative square matrix.

    Power iteration from the all-ones vector. The estimate is the
    geometric mean growth over the last two steps, which also settles on
    period-2 matrices (e.g. a swap) where the one-step ratio oscillates.
    """
    a = as_matrix(m)
    n, cols = a.shape
    if n != cols:
        raise ValueError("spectral radius needs a square matrix")
    if n == 0:
        return 0.0
    x = np.ones(n)
    growth = [1.0, 1.0]
    for _ in range(iterations):
        y = a @ x
        norm = float(np.max(np.abs(y)))
        if norm == 0.0:
            return 0.0
        growth = [growth[1], norm]
        x = y / norm
    return float(np.sqrt(growth[0] * growth[1]))


def norm_inf(m) -> float:
    a = np.asarray(m, dtype=float)
    if a.size == 0:
        return 0.0
    if a.ndim == 1:
        return float(np.max(np.abs(a)))
    return float(np.max(np.sum(np.abs(a), axis=1)))
