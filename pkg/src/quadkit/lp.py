"""Small dense linear-program solver for contact-wrench feasibility queries.

Problems here are tiny (around 14 free variables, 6 equalities, and a few
dozen inequalities) but are solved many times per region query, so a
self-contained dense tableau simplex beats the setup cost of a general
sparse solver by an order of magnitude.  The pivot kernel is compiled with
numba; pivoting is Dantzig's rule for speed with a fallback to Bland's rule
whenever the objective stalls, which keeps the cycling-safety guarantee.

A :class:`LinearProgram` keeps its tableau between calls, so re-solving the
same constraint set under a new objective warm-starts from the previous
optimal basis (the region-refinement loop changes only the objective).
"""

from __future__ import annotations

import numpy as np
from numba import njit

_TOL = 1e-9
_MAX_PIVOTS = 20000
_STALL_LIMIT = 25  # consecutive non-improving pivots before Bland's rule kicks in

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_STATUS_OPTIMAL = 0
_STATUS_UNBOUNDED = 1
_STATUS_PIVOT_BUDGET = 2


class LpNumericalError(RuntimeError):
    """The solver failed numerically (distinct from provable infeasibility)."""


class LpResult:
    __slots__ = ("status", "x", "objective")

    def __init__(self, status: str, x: np.ndarray | None, objective: float | None):
        self.status = status
        self.x = x
        self.objective = objective

    def __repr__(self):  # pragma: no cover - debugging aid
        return f"LpResult(status={self.status!r}, objective={self.objective})"


@njit(cache=True)
def _pivot_kernel(work, basis, row, col):  # pragma: no cover - exercised via simplex
    m1, n1 = work.shape
    inv = 1.0 / work[row, col]
    for j in range(n1):
        work[row, j] *= inv
    for i in range(m1):
        if i == row:
            continue
        factor = work[i, col]
        if factor != 0.0:
            for j in range(n1):
                work[i, j] -= factor * work[row, j]
    basis[row] = col


@njit(cache=True)
def _simplex_kernel(work, basis):  # pragma: no cover - compiled
    """Primal simplex (maximization) on a tableau whose last row holds z - c.

    Dantzig pivoting with a Bland fallback on objective stalls; mutates
    ``work`` and ``basis`` in place.  Returns a status code.
    """
    m = work.shape[0] - 1
    n_cols = work.shape[1] - 1
    bland = False
    stall = 0
    last_objective = -np.inf
    for _ in range(_MAX_PIVOTS):
        entering = -1
        if bland:
            for j in range(n_cols):
                if work[m, j] < -_TOL:
                    entering = j
                    break
        else:
            z_best = -_TOL
            for j in range(n_cols):
                if work[m, j] < z_best:
                    z_best = work[m, j]
                    entering = j
        if entering < 0:
            return _STATUS_OPTIMAL
        best_ratio = np.inf
        leaving = -1
        for i in range(m):
            coeff = work[i, entering]
            if coeff > _TOL:
                ratio = work[i, n_cols] / coeff
                if ratio < best_ratio - _TOL:
                    best_ratio = ratio
                    leaving = i
                elif ratio <= best_ratio + _TOL and leaving >= 0 and basis[i] < basis[leaving]:
                    leaving = i
        if leaving < 0:
            return _STATUS_UNBOUNDED
        _pivot_kernel(work, basis, leaving, entering)
        objective = work[m, n_cols]
        if objective > last_objective + 1e-12:
            stall = 0
            bland = False
        else:
            stall += 1
            if stall >= _STALL_LIMIT:
                bland = True
        last_objective = objective
    return _STATUS_PIVOT_BUDGET


def _run_simplex(work: np.ndarray, basis: np.ndarray) -> str:
    code = _simplex_kernel(work, basis)
    if code == _STATUS_OPTIMAL:
        return OPTIMAL
    if code == _STATUS_UNBOUNDED:
        return UNBOUNDED
    raise LpNumericalError("simplex exceeded the pivot budget")


class LinearProgram:
    """maximize c @ x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  x free.

    Free variables are split into positive parts internally; inequality
    rows get slack variables.  ``solve`` may be called repeatedly with
    different objectives and reuses the feasible basis found previously.
    """

    def __init__(self, a_eq, b_eq, a_ub, b_ub):
        a_eq = np.atleast_2d(np.asarray(a_eq, dtype=np.float64)) if a_eq is not None else np.zeros((0, 0))
        a_ub = np.atleast_2d(np.asarray(a_ub, dtype=np.float64)) if a_ub is not None else np.zeros((0, 0))
        b_eq = np.atleast_1d(np.asarray(b_eq, dtype=np.float64)) if b_eq is not None else np.zeros(0)
        b_ub = np.atleast_1d(np.asarray(b_ub, dtype=np.float64)) if b_ub is not None else np.zeros(0)
        n = a_eq.shape[1] if a_eq.size else a_ub.shape[1]
        if a_eq.size == 0:
            a_eq = np.zeros((0, n))
        if a_ub.size == 0:
            a_ub = np.zeros((0, n))
        if a_eq.shape[0] != b_eq.shape[0] or a_ub.shape[0] != b_ub.shape[0]:
            raise ValueError("constraint matrix/vector shapes disagree")
        self.n_free = n
        m_eq, m_ub = a_eq.shape[0], a_ub.shape[0]
        self.m = m_eq + m_ub
        self._m_eq = m_eq

        # standard form: x = xp - xn, slacks on inequality rows
        a = np.vstack([
            np.hstack([a_eq, -a_eq, np.zeros((m_eq, m_ub))]),
            np.hstack([a_ub, -a_ub, np.eye(m_ub)]),
        ])
        b = np.concatenate([b_eq, b_ub])
        flip = b < 0
        a[flip] *= -1.0
        b[flip] *= -1.0
        self.n_std = a.shape[1]
        self._a = a
        self._b = b
        self._flip = flip
        self._tableau: np.ndarray | None = None  # basis-inverse times [A | b]
        self._basis: np.ndarray | None = None
        self._feasible: bool | None = None

    def _phase1(self) -> bool:
        m, n = self.m, self.n_std
        if m == 0:
            self._tableau = np.zeros((0, n + 1))
            self._basis = np.zeros(0, dtype=np.int64)
            self._feasible = True
            return True
        # inequality rows that kept a +1 slack start basic on it; equality
        # rows and sign-flipped rows need artificial variables
        needs_art = np.ones(m, dtype=bool)
        needs_art[self._m_eq:] = self._flip[self._m_eq:]
        art_rows = np.flatnonzero(needs_art)
        n_art = int(art_rows.size)
        work = np.zeros((m + 1, n + n_art + 1))
        work[:m, :n] = self._a
        work[:m, -1] = self._b
        basis = np.empty(m, dtype=np.int64)
        for j, row in enumerate(art_rows):
            work[row, n + j] = 1.0
            basis[row] = n + j
        n_free2 = 2 * self.n_free
        for row in range(self._m_eq, m):
            if not needs_art[row]:
                basis[row] = n_free2 + (row - self._m_eq)
        # cost row for maximize -(sum of artificials): z - c with c = -1 on artificials
        c1 = np.zeros(n + n_art)
        c1[n:] = -1.0
        work[-1, :-1] = c1[basis] @ work[:m, :-1] - c1
        work[-1, -1] = c1[basis] @ work[:m, -1]
        status = _run_simplex(work, basis)
        if status != OPTIMAL:
            raise LpNumericalError("phase-1 simplex did not terminate at an optimum")
        if -work[-1, -1] > 1e-7:
            self._feasible = False
            return False
        # pivot leftover artificials out of the basis; drop redundant rows
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if basis[i] >= n:
                nz = np.flatnonzero(np.abs(work[i, :n]) > _TOL)
                if nz.size:
                    _pivot_kernel(work, basis, i, int(nz[0]))
                else:
                    keep[i] = False
        self._tableau = np.ascontiguousarray(
            np.hstack([work[:m, :n], work[:m, -1:]])[keep])
        self._basis = basis[keep]
        self._feasible = True
        return True

    def solve(self, c) -> LpResult:
        c = np.asarray(c, dtype=np.float64)
        if c.shape != (self.n_free,):
            raise ValueError(f"objective must have {self.n_free} entries")
        if self._feasible is None:
            self._phase1()
        if not self._feasible:
            return LpResult(INFEASIBLE, None, None)
        n = self.n_std
        c_std = np.zeros(n)
        c_std[:self.n_free] = c
        c_std[self.n_free:2 * self.n_free] = -c
        tableau, basis = self._tableau, self._basis
        m = tableau.shape[0]
        work = np.empty((m + 1, n + 1))
        work[:m] = tableau
        work[-1, :n] = c_std[basis] @ tableau[:, :n] - c_std
        work[-1, -1] = c_std[basis] @ tableau[:, -1]
        status = _run_simplex(work, basis)
        self._tableau = work[:m]
        if status == UNBOUNDED:
            return LpResult(UNBOUNDED, None, None)
        x_std = np.zeros(n)
        x_std[basis] = work[:m, -1]
        x = x_std[:self.n_free] - x_std[self.n_free:2 * self.n_free]
        return LpResult(OPTIMAL, x, float(c @ x))
