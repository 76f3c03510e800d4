"""Local movability test for a rank-size factorization ``A = B C B^T``.

The factorization can be nudged towards strictly positive factors unless the
homogeneous system

    X >= 0,  W = W^T >= 0,  X o B = 0,  W o C = 0,  W C = B^T X

has a nonzero solution. :func:`boundary_certificate` looks for such a
solution with a normalized LP. A certificate only blocks this first-order
argument; it is not a proof that the matrix lies on the boundary of the
rank-equals-SNT-rank class.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import InvariantError, ShapeError
from .simplex import OPTIMAL, linprog_simplex

ZERO_REL_TOL = 1e-9
FEAS_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class CertificateProblem:
    B: np.ndarray
    C: np.ndarray
    ZB: tuple[tuple[int, int], ...]
    ZC: tuple[tuple[int, int], ...]
    tol: float

    @classmethod
    def build(cls, B, C, tol: float = ZERO_REL_TOL) -> "CertificateProblem":
        """Collect structural zeros: entries at most ``tol * max entry`` of each factor."""
        B = np.atleast_2d(np.asarray(B, dtype=float))
        C = np.atleast_2d(np.asarray(C, dtype=float))
        if C.shape != (B.shape[1], B.shape[1]):
            raise ShapeError(f"B{B.shape} and C{C.shape} do not fit")
        if np.abs(C - C.T).max() > 1e-10 * max(1.0, np.abs(C).max()):
            raise InvariantError("C must be symmetric")
        C = (C + C.T) / 2.0
        zb = tol * max(np.abs(B).max(), 0.0)
        zc = tol * max(np.abs(C).max(), 0.0)
        ZB = tuple((i, j) for i in range(B.shape[0]) for j in range(B.shape[1]) if B[i, j] <= zb)
        ZC = tuple((i, j) for i in range(C.shape[0]) for j in range(i, C.shape[0]) if C[i, j] <= zc)
        return cls(B, C, ZB, ZC, tol)


@dataclass(frozen=True, eq=False)
class Certificate:
    X: np.ndarray
    W: np.ndarray

    @property
    def norm(self) -> float:
        return float(self.X.sum() + self.W.sum())

    def residual(self, B, C) -> float:
        return float(np.abs(self.W @ C - np.asarray(B).T @ self.X).max())


def _system(problem: CertificateProblem):
    """Rows of ``W C - B^T X`` (flattened r x r) over the free variables."""
    B, C = problem.B, problem.C
    r = C.shape[0]
    nx, nw = len(problem.ZB), len(problem.ZC)
    M = np.zeros((r * r, nx + nw))
    for t, (i, j) in enumerate(problem.ZB):
        # (B^T X)_{a j} picks up B[i, a] * X[i, j]
        M[np.arange(r) * r + j, t] -= B[i, :]
    for t, (i, j) in enumerate(problem.ZC):
        # W[i, j] = W[j, i] = w feeds rows i and j of W C
        M[i * r : (i + 1) * r, nx + t] += C[j, :]
        if i != j:
            M[j * r : (j + 1) * r, nx + t] += C[i, :]
    weights = np.array([1.0] * nx + [1.0 if i == j else 2.0 for i, j in problem.ZC])
    return M, weights


def boundary_certificate(B, C, tol: float = ZERO_REL_TOL) -> Certificate | None:
    """Nonzero solution ``(X, W)`` of the movability system, or ``None``.

    The equality ``W C = B^T X`` enters the LP as two one-sided inequalities
    with slack ``1e-9``; the normalization ``sum(X) + sum(W) = 1`` rules out
    the zero solution.
    """
    problem = CertificateProblem.build(B, C, tol)
    nx, nw = len(problem.ZB), len(problem.ZC)
    if nx + nw == 0:
        return None
    M, weights = _system(problem)
    A_ub = np.vstack([M, -M])
    b_ub = np.full(A_ub.shape[0], FEAS_TOL)
    res = linprog_simplex(np.zeros(nx + nw), A_ub, b_ub, weights[None, :], [1.0])
    if res.status != OPTIMAL:
        return None
    v = _polish(M, weights, res.x)
    n, r = problem.B.shape
    X = np.zeros((n, r))
    W = np.zeros((r, r))
    for t, (i, j) in enumerate(problem.ZB):
        X[i, j] = v[t]
    for t, (i, j) in enumerate(problem.ZC):
        W[i, j] = W[j, i] = v[nx + t]
    return Certificate(X, W)


def _polish(M, weights, v):
    """Project the LP vertex onto ``M v = 0`` within its own support, if that stays nonnegative."""
    support = v > 0
    if not support.any():
        return v
    sub = M[:, support]
    w = v[support] - np.linalg.lstsq(sub, sub @ v[support], rcond=None)[0]
    if w.min() < 0:
        return v
    out = np.zeros_like(v)
    out[support] = w
    out /= weights @ out
    if np.abs(M @ out).max() < np.abs(M @ v).max():
        return out
    return v


def find_move_direction(B, C, tol: float = ZERO_REL_TOL, margin_tol: float = 1e-9):
    """Direction ``Y`` with ``-(B Y) > 0`` on Z(B) and ``Y C + C Y^T > 0`` on Z(C).

    This is the primal side of the alternative; it is solved with HiGHS
    (through :func:`scipy.optimize.linprog`), independently of the tableau
    simplex used by :func:`boundary_certificate`. Returns ``None`` when no
    strictly feasible direction exists.
    """
    problem = CertificateProblem.build(B, C, tol)
    B, C = problem.B, problem.C
    r = C.shape[0]
    if not problem.ZB and not problem.ZC:
        return np.zeros((r, r))
    rows = []
    for i, j in problem.ZB:
        # -(B Y)_{ij} = -sum_l B[i, l] Y[l, j]
        g = np.zeros((r, r))
        g[:, j] = -B[i, :]
        rows.append(g.ravel())
    for i, j in problem.ZC:
        # (Y C)_{ij} + (C Y^T)_{ij} = sum_l Y[i, l] C[l, j] + C[i, l] Y[j, l]
        g = np.zeros((r, r))
        g[i, :] += C[:, j]
        g[j, :] += C[i, :]
        rows.append(g.ravel())
    G = np.array(rows)
    # maximize t subject to G vec(Y) >= t, t <= 1
    A_ub = np.hstack([-G, np.ones((G.shape[0], 1))])
    c = np.zeros(r * r + 1)
    c[-1] = -1.0
    bounds = [(None, None)] * (r * r) + [(None, 1.0)]
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(G.shape[0]), bounds=bounds, method="highs")
    if res.status != 0 or -res.fun <= margin_tol:
        return None
    return res.x[:-1].reshape(r, r)


def check_movable(B, C, tol: float = ZERO_REL_TOL) -> bool:
    """True when some sufficient condition for movability holds.

    Either factor strictly positive, or no certificate exists. ``False`` only
    means no such evidence was found.
    """
    B = np.asarray(B, dtype=float)
    C = np.asarray(C, dtype=float)
    if np.all(B > tol * B.max()) or np.all(C > tol * C.max()):
        return True
    return boundary_certificate(B, C, tol) is None
