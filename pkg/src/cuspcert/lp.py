"""Dense two-phase simplex for the small LPs of the coefficient search.

Pivoting uses Dantzig's rule and falls back to Bland's rule once a run of
degenerate pivots is observed, which rules out cycling while keeping the
pivot count low on the wide constraint systems produced by group samples.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

TOL = 1e-9


class LPError(RuntimeError):
    """Raised when the pivot budget is exhausted."""


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None
    fun: float | None
    pivots: int


class _Tableau:
    def __init__(self, T: np.ndarray, basis: list[int], max_pivots: int):
        self.T = T
        self.basis = basis
        self.pivots = 0
        self.max_pivots = max_pivots

    def pivot(self, row: int, col: int) -> None:
        T = self.T
        T[row] /= T[row, col]
        colv = T[:, col].copy()
        colv[row] = 0.0
        T -= np.outer(colv, T[row])
        self.basis[row] = col
        self.pivots += 1
        if self.pivots > self.max_pivots:
            raise LPError("simplex pivot budget exceeded")

    def run(self, allowed: np.ndarray) -> str:
        """Minimize the objective stored in the last row over allowed columns."""
        T = self.T
        m = T.shape[0] - 1
        degenerate_run = 0
        while True:
            cost = T[-1, :-1]
            candidates = np.flatnonzero((cost < -TOL) & allowed)
            if candidates.size == 0:
                return "optimal"
            bland = degenerate_run >= 8
            col = int(candidates[0]) if bland else int(candidates[np.argmin(cost[candidates])])
            column = T[:m, col]
            positive = column > TOL
            if not positive.any():
                return "unbounded"
            ratios = np.full(m, np.inf)
            ratios[positive] = T[:m, -1][positive] / column[positive]
            best = ratios.min()
            ties = np.flatnonzero(ratios <= best + TOL * max(1.0, abs(best)))
            # Bland tie-break on the leaving variable: smallest basis index
            row = int(min(ties, key=lambda r: self.basis[r]))
            degenerate_run = degenerate_run + 1 if best <= TOL else 0
            self.pivot(row, col)


def _standard_form(c, A_ub, b_ub, A_eq, b_eq, bounds, n):
    """Rewrite with nonnegative variables; returns a recovery map."""
    bounds = list(bounds) if bounds is not None else [(0.0, None)] * n
    if len(bounds) != n:
        raise ValueError("bounds length mismatch")
    cols = []  # per original variable: list of (std index, sign), offset
    offset = np.zeros(n)
    n_std = 0
    extra_ub = []  # (std index, upper)
    for j, (lo, hi) in enumerate(bounds):
        if lo is not None and hi is not None and hi < lo:
            raise ValueError(f"empty bounds for variable {j}")
        if lo is not None:
            offset[j] = lo
            cols.append([(n_std, 1.0)])
            if hi is not None:
                extra_ub.append((n_std, hi - lo))
            n_std += 1
        elif hi is not None:
            offset[j] = hi
            cols.append([(n_std, -1.0)])
            n_std += 1
        else:
            cols.append([(n_std, 1.0), (n_std + 1, -1.0)])
            n_std += 2
    lift = np.zeros((n, n_std))
    for j, entries in enumerate(cols):
        for k, s in entries:
            lift[j, k] = s

    def convert(A, b):
        A = np.atleast_2d(np.asarray(A, dtype=float)).reshape(-1, n)
        b = np.asarray(b, dtype=float).reshape(-1)
        if A.shape[0] != b.shape[0]:
            raise ValueError("constraint matrix and right-hand side disagree")
        return A @ lift, b - A @ offset

    ub_A, ub_b = (convert(A_ub, b_ub) if A_ub is not None and len(b_ub) else
                  (np.zeros((0, n_std)), np.zeros(0)))
    for k, u in extra_ub:
        row = np.zeros(n_std)
        row[k] = 1.0
        ub_A = np.vstack([ub_A, row])
        ub_b = np.append(ub_b, u)
    eq_A, eq_b = (convert(A_eq, b_eq) if A_eq is not None and len(b_eq) else
                  (np.zeros((0, n_std)), np.zeros(0)))
    c_std = np.asarray(c, dtype=float) @ lift
    const = float(np.asarray(c, dtype=float) @ offset)
    return c_std, ub_A, ub_b, eq_A, eq_b, lift, offset, const


def linprog(c: Sequence[float], A_ub=None, b_ub=None, A_eq=None, b_eq=None,
            bounds=None, max_pivots: int = 50_000) -> LPResult:
    """Minimize c.x subject to A_ub x <= b_ub, A_eq x = b_eq and bounds.

    ``bounds`` is a list of (lo, hi) pairs with None for an open side; the
    default is x >= 0.
    """
    c = np.asarray(c, dtype=float).reshape(-1)
    n = c.size
    for arr in (A_ub, b_ub, A_eq, b_eq):
        if arr is not None and not np.all(np.isfinite(np.asarray(arr, dtype=float))):
            raise ValueError("non-finite constraint data")
    c_std, ub_A, ub_b, eq_A, eq_b, lift, offset, const = _standard_form(
        c, A_ub, b_ub, A_eq, b_eq, bounds, n)
    m_ub, m_eq = ub_A.shape[0], eq_A.shape[0]
    m = m_ub + m_eq
    n_std = c_std.size
    # columns: structural | slacks (one per ub row) | artificials
    A = np.zeros((m, n_std + m_ub))
    b = np.zeros(m)
    A[:m_ub, :n_std] = ub_A
    A[:m_ub, n_std:] = np.eye(m_ub)
    b[:m_ub] = ub_b
    A[m_ub:, :n_std] = eq_A
    b[m_ub:] = eq_b
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1
    basis = [-1] * m
    for i in range(m_ub):
        if not neg[i]:
            basis[i] = n_std + i
    need_art = [i for i in range(m) if basis[i] < 0]
    n_real = n_std + m_ub
    n_art = len(need_art)
    T = np.zeros((m + 1, n_real + n_art + 1))
    T[:m, :n_real] = A
    T[:m, -1] = b
    for k, i in enumerate(need_art):
        T[i, n_real + k] = 1.0
        basis[i] = n_real + k
    tab = _Tableau(T, basis, max_pivots)

    if n_art:
        # phase I: minimize the sum of artificials
        T[-1, :] = 0.0
        T[-1, n_real:n_real + n_art] = 1.0
        for i in need_art:
            T[-1] -= T[i]
        allowed = np.ones(n_real + n_art, dtype=bool)
        tab.run(allowed)
        if -T[-1, -1] > TOL * max(1.0, float(np.abs(b).max(initial=0.0))):
            return LPResult("infeasible", None, None, tab.pivots)
        # drive artificials out of the basis
        for i in range(m):
            if tab.basis[i] >= n_real:
                row = tab.T[i, :n_real]
                nz = np.flatnonzero(np.abs(row) > TOL)
                if nz.size:
                    tab.pivot(i, int(nz[0]))
        keep = [i for i in range(m) if tab.basis[i] < n_real]
        T = np.vstack([tab.T[keep][:, list(range(n_real)) + [-1]], np.zeros((1, n_real + 1))])
        tab = _Tableau(T, [tab.basis[i] for i in keep], max_pivots - tab.pivots)

    # phase II
    T = tab.T
    T[-1, :] = 0.0
    T[-1, :n_std] = c_std
    for i, bvar in enumerate(tab.basis):
        if T[-1, bvar] != 0.0:
            T[-1] -= T[-1, bvar] * T[i]
    status = tab.run(np.ones(T.shape[1] - 1, dtype=bool))
    y = np.zeros(T.shape[1] - 1)
    for i, bvar in enumerate(tab.basis):
        y[bvar] = T[i, -1]
    x = lift @ y[:n_std] + offset
    if status == "unbounded":
        return LPResult("unbounded", x, None, tab.pivots)
    return LPResult("optimal", x, float(c @ x), tab.pivots)


def _as_system(constraints, b):
    if b is None:
        rows = list(constraints)
        if not rows:
            raise ValueError("empty constraint list")
        try:
            A = np.array([np.asarray(a, dtype=float).reshape(-1) for a, _ in rows])
            rhs = np.array([float(r) for _, r in rows])
        except (TypeError, ValueError) as exc:
            raise ValueError(f"malformed constraint: {exc}") from exc
    else:
        A = np.atleast_2d(np.asarray(constraints, dtype=float))
        rhs = np.asarray(b, dtype=float).reshape(-1)
    if A.ndim != 2 or A.shape[0] != rhs.size:
        raise ValueError("malformed constraint system")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(rhs))):
        raise ValueError("non-finite constraint data")
    return A, rhs


def lp_feasible(constraints, b=None) -> np.ndarray | None:
    """Find x with a_i.x >= b_i for every constraint, or None if infeasible.

    Accepts either a list of ``(a_i, b_i)`` pairs or a matrix ``A`` together
    with the vector ``b``. Variables are free.
    """
    A, rhs = _as_system(constraints, b)
    d = A.shape[1]
    res = linprog(np.zeros(d), A_ub=-A, b_ub=-rhs, bounds=[(None, None)] * d)
    if res.status == "infeasible":
        return None
    return res.x
