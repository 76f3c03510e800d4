"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Solves::

    minimize    c @ x
    subject to  A_ub @ x <= b_ub
                A_eq @ x == b_eq
                x >= 0

Intended for the small feasibility problems in :mod:`snt.certificate`; the
tableau is dense and every pivot touches all of it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"


@dataclass
class LPResult:
    status: str
    x: np.ndarray | None
    fun: float | None
    iterations: int


def _pivot(T: np.ndarray, basis: list[int], row: int, col: int) -> None:
    T[row] /= T[row, col]
    for i in range(T.shape[0]):
        if i != row and T[i, col] != 0.0:
            T[i] -= T[i, col] * T[row]
    basis[row] = col


def _run(T, basis, allowed, tol, max_iter, it):
    """Bland iterations on tableau ``T`` whose last row is the reduced-cost row."""
    m = T.shape[0] - 1
    while it < max_iter:
        costs = T[-1, :-1]
        entering = next((j for j in allowed if costs[j] < -tol), None)
        if entering is None:
            return OPTIMAL, it
        col = T[:m, entering]
        rows = np.flatnonzero(col > tol)
        if rows.size == 0:
            return UNBOUNDED, it
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + tol * max(1.0, abs(best))]
        leave = min(ties, key=lambda i: basis[i])
        _pivot(T, basis, int(leave), entering)
        it += 1
    return ITERATION_LIMIT, it


def linprog_simplex(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, tol: float = 1e-9, max_iter: int = 10_000):
    c = np.asarray(c, dtype=float)
    nv = c.size
    A_ub = np.zeros((0, nv)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    A_eq = np.zeros((0, nv)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)

    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq
    # columns: original | slack/surplus (one per ub row) | artificial (as needed)
    needs_art = [b_ub[i] < 0 for i in range(m_ub)] + [True] * m_eq
    n_art = sum(needs_art)
    width = nv + m_ub + n_art
    T = np.zeros((m + 1, width + 1))
    basis: list[int] = []
    art = nv + m_ub
    for i in range(m_ub):
        sign = -1.0 if b_ub[i] < 0 else 1.0
        T[i, :nv] = sign * A_ub[i]
        T[i, nv + i] = sign
        T[i, -1] = sign * b_ub[i]
        if needs_art[i]:
            T[i, art] = 1.0
            basis.append(art)
            art += 1
        else:
            basis.append(nv + i)
    for i in range(m_eq):
        sign = -1.0 if b_eq[i] < 0 else 1.0
        r = m_ub + i
        T[r, :nv] = sign * A_eq[i]
        T[r, -1] = sign * b_eq[i]
        T[r, art] = 1.0
        basis.append(art)
        art += 1

    art_cols = list(range(nv + m_ub, width))
    it = 0
    if n_art:
        T[-1, art_cols] = 1.0
        for r, b in enumerate(basis):
            if b >= nv + m_ub:
                T[-1] -= T[r]
        status, it = _run(T, basis, range(width), tol, max_iter, it)
        if status == ITERATION_LIMIT:
            return LPResult(status, None, None, it)
        if -T[-1, -1] > tol * max(1.0, np.abs(T[:m, -1]).max(initial=0.0)):
            return LPResult(INFEASIBLE, None, None, it)
        # drive remaining artificials out of the basis; drop redundant rows
        keep = []
        for r in range(m):
            if basis[r] >= nv + m_ub:
                cand = [j for j in range(nv + m_ub) if abs(T[r, j]) > tol]
                if cand:
                    _pivot(T, basis, r, cand[0])
                    keep.append(r)
            else:
                keep.append(r)
        T = np.vstack([T[keep], T[-1:]])
        basis = [basis[r] for r in keep]
        m = len(keep)
        T = np.delete(T, art_cols, axis=1)

    width = nv + m_ub
    T[-1] = 0.0
    T[-1, :nv] = c
    for r, b in enumerate(basis):
        if T[-1, b] != 0.0:
            T[-1] -= T[-1, b] * T[r]
    status, it = _run(T, basis, range(width), tol, max_iter, it)
    if status != OPTIMAL:
        return LPResult(status, None, None, it)
    x = np.zeros(width)
    for r, b in enumerate(basis):
        x[b] = T[r, -1]
    x = x[:nv]
    return LPResult(OPTIMAL, x, float(c @ x), it)
