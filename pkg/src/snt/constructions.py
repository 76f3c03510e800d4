"""Closed-form SN-Trifactorization builders.

Every builder returns a :class:`~snt.matcore.Trifactor`; the inner dimension
``k`` of the result is an upper bound on the SNT-rank of its product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from .errors import InvariantError, NotSeparableError, RankError, ShapeError
from .matcore import MatrixLike, SymMatrix, Trifactor, as_sym, eigh, numerical_rank


@dataclass(frozen=True, eq=False)
class NmfPair:
    """Nonnegative factors ``U`` (n x k) and ``V`` (m x k) of ``M = U V^T``."""

    U: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        U = np.atleast_2d(np.asarray(self.U, dtype=float))
        V = np.atleast_2d(np.asarray(self.V, dtype=float))
        if U.shape[1] != V.shape[1]:
            raise ShapeError(f"U{U.shape} and V{V.shape} have different column counts")
        if U.min() < 0 or V.min() < 0:
            raise InvariantError("NMF factors must be nonnegative")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "V", V)

    @property
    def k(self) -> int:
        return self.U.shape[1]

    def product(self) -> np.ndarray:
        return self.U @ self.V.T


def _swap_blocks(k: int) -> np.ndarray:
    z = np.zeros((k, k))
    i = np.eye(k)
    return np.block([[z, i], [i, z]])


def direct_sum(F1: Trifactor, F2: Trifactor) -> Trifactor:
    B = np.zeros((F1.n + F2.n, F1.k + F2.k))
    B[: F1.n, : F1.k] = F1.B
    B[F1.n :, F1.k :] = F2.B
    C = np.zeros((F1.k + F2.k,) * 2)
    C[: F1.k, : F1.k] = F1.C
    C[F1.k :, F1.k :] = F2.C
    return Trifactor(B, C)


def sum_factor(F1: Trifactor, F2: Trifactor) -> Trifactor:
    """Factor of ``A1 + A2``: ``B = [B1 B2]``, ``C = C1 (+) C2``."""
    if F1.n != F2.n:
        raise ShapeError(f"cannot add factors of {F1.n} and {F2.n} rows")
    C = np.zeros((F1.k + F2.k,) * 2)
    C[: F1.k, : F1.k] = F1.C
    C[F1.k :, F1.k :] = F2.C
    return Trifactor(np.hstack([F1.B, F2.B]), C)


def power_factor(F: Trifactor, m: int) -> Trifactor:
    """Factor of ``A**m`` with the same ``B``: ``C' = (C B^T B)^(m-1) C``."""
    if m < 1:
        raise InvariantError("power must be a positive integer")
    G = F.C @ F.B.T @ F.B
    C = np.linalg.matrix_power(G, m - 1) @ F.C
    return Trifactor(F.B, (C + C.T) / 2.0)


def principal_subfactor(F: Trifactor, rows) -> Trifactor:
    rows = np.atleast_1d(np.asarray(rows, dtype=int))
    if rows.size == 0:
        raise InvariantError("row set is empty")
    if rows.min() < 0 or rows.max() >= F.n:
        raise InvariantError(f"row indices out of range(0, {F.n})")
    return Trifactor(F.B[rows], F.C)


def bipartite_factor(pair: NmfPair) -> Trifactor:
    """Factor of ``[[0, U V^T], [V U^T, 0]]`` with ``k = 2 * pair.k``."""
    n, m, k = pair.U.shape[0], pair.V.shape[0], pair.k
    B = np.zeros((n + m, 2 * k))
    B[:n, :k] = pair.U
    B[n:, k:] = pair.V
    return Trifactor(B, _swap_blocks(k))


def symmetrization_factor(pair: NmfPair) -> Trifactor:
    """Factor of ``U V^T + V U^T`` with ``k = 2 * pair.k``."""
    if pair.U.shape[0] != pair.V.shape[0]:
        raise ShapeError("U and V need the same number of rows")
    return Trifactor(np.hstack([pair.U, pair.V]), _swap_blocks(pair.k))


def _cone_coefficients(A: np.ndarray, cols, tol: float):
    """Nonnegative coefficients expressing every column of ``A`` through ``A[:, cols]``."""
    basis = A[:, cols]
    Q = np.zeros((len(cols), A.shape[1]))
    worst, worst_j = 0.0, None
    for j in range(A.shape[1]):
        q, res = nnls(basis, A[:, j])
        rel = res / max(1.0, np.linalg.norm(A[:, j]))
        if rel > worst:
            worst, worst_j = rel, j
        Q[:, j] = q
    return Q, worst, worst_j


def separable_factor(A: MatrixLike, cols, tol: float = 1e-9) -> Trifactor:
    """Factor ``A = Q~^T A[cols, cols] Q~`` when ``A[:, cols]`` generates every column.

    ``Q~`` holds the nonnegative coefficients (identity on ``cols``), found
    column by column with nonnegative least squares.

    Raises
    ------
    NotSeparableError
        If some column is not in the cone of ``A[:, cols]``; the error
        carries the worst column and its relative residual.
    """
    a = as_sym(A).entries
    cols = [int(c) for c in np.atleast_1d(cols)]
    if not cols or len(set(cols)) != len(cols) or min(cols) < 0 or max(cols) >= a.shape[0]:
        raise InvariantError(f"invalid column set {cols}")
    Q, worst, worst_j = _cone_coefficients(a, cols, tol)
    if worst > tol:
        raise NotSeparableError(
            f"column {worst_j} is not generated by columns {cols} (relative residual {worst:.3g})",
            worst_column=worst_j,
            worst_residual=worst,
        )
    Q[:, cols] = np.eye(len(cols))
    return Trifactor(Q.T, a[np.ix_(cols, cols)])


def separable_columns(A: MatrixLike, tol: float = 1e-9) -> list[int]:
    """A column set that nonnegatively generates ``A``.

    Greedy in index order: keep a column if the current set does not already
    generate it, then drop any kept column the others make redundant.
    """
    a = as_sym(A).entries
    chosen: list[int] = []
    for j in range(a.shape[1]):
        if not np.any(a[:, j]):
            continue
        if chosen and _cone_coefficients(a, chosen, tol)[1] <= tol:
            break
        if chosen and _in_cone(a[:, chosen], a[:, j], tol):
            continue
        chosen.append(j)
    for j in list(chosen):
        rest = [c for c in chosen if c != j]
        if rest and _cone_coefficients(a, rest, tol)[1] <= tol:
            chosen = rest
    return chosen


def _in_cone(basis: np.ndarray, col: np.ndarray, tol: float) -> bool:
    _, res = nnls(basis, col)
    return res / max(1.0, np.linalg.norm(col)) <= tol


def rank2_factor(A: MatrixLike, tol: float | None = None) -> Trifactor:
    """Exact ``k = 2`` factorization of a rank-2 nonnegative symmetric matrix.

    Columns are mapped to coordinates in a rank-2 eigenbasis. Being
    nonnegative, they sit inside a pointed planar cone; the two columns at the
    extreme angles generate all others, which makes the matrix separable with
    two anchor columns.
    """
    a = as_sym(A)
    r = numerical_rank(a, tol)
    if r != 2:
        raise RankError(f"expected rank 2, got {r}")
    M = a.entries
    w, v = eigh(a)
    top = np.argsort(-np.abs(w), kind="stable")[:2]
    coords = v[:, top].T @ M  # 2 x n
    norms = np.linalg.norm(coords, axis=0)
    live = np.flatnonzero(norms > 1e-12 * norms.max())
    ref = (coords[:, live] / norms[live]).sum(axis=1)
    ref /= np.linalg.norm(ref)
    perp = np.array([-ref[1], ref[0]])
    angles = np.arctan2(coords[:, live].T @ perp, coords[:, live].T @ ref)
    # stable argmin/argmax pick the smaller index on ties
    j1 = int(live[np.argmin(angles)])
    j2 = int(live[np.argmax(angles)])
    if j1 == j2:
        raise RankError("all nonzero columns are parallel")
    cols = sorted((j1, j2))
    basis = coords[:, cols]
    Q = np.linalg.solve(basis, coords)
    Q[:, cols] = np.eye(2)
    scale = max(1.0, np.abs(Q).max())
    if Q.min() < -1e-8 * scale:
        raise RankError("extreme-ray coefficients came out negative; matrix is not numerically rank 2")
    Q[Q < 0] = 0.0
    return Trifactor(Q.T, M[np.ix_(cols, cols)])


def edm_matrix(n: int) -> np.ndarray:
    i = np.arange(1, n + 1)
    return (i[:, None] - i[None, :]) ** 2


def edm_factor(n: int) -> tuple[SymMatrix, Trifactor]:
    """The squared-distance matrix ``M[i, j] = (i - j)**2`` and a factor with ``k = n/2 + 2``.

    Only even ``n`` is supported; for odd ``n`` take rows ``0..n-1`` of the
    ``n + 1`` factor with :func:`principal_subfactor`.
    """
    if n < 2 or n % 2:
        raise InvariantError(f"n must be even and at least 2, got {n}")
    h = n // 2
    v = np.arange(1, n, 2)
    K = np.fliplr(np.eye(h, dtype=np.int64))
    B = np.zeros((n, h + 2), dtype=np.int64)
    B[:h, 0] = K @ v
    B[:h, 2:] = np.eye(h, dtype=np.int64)
    B[h:, 1] = v
    B[h:, 2:] = K
    C = np.zeros((h + 2, h + 2), dtype=np.int64)
    C[0, 1] = C[1, 0] = 1
    C[2:, 2:] = edm_matrix(h)
    return SymMatrix(edm_matrix(n)), Trifactor(B, C)


def edm_factor_any(n: int) -> tuple[SymMatrix, Trifactor]:
    """Like :func:`edm_factor` but also for odd ``n`` (``k = ceil(n/2) + 2``)."""
    if n % 2 == 0:
        return edm_factor(n)
    _, F = edm_factor(n + 1)
    return SymMatrix(edm_matrix(n)), principal_subfactor(F, range(n))
