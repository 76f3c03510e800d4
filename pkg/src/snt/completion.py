"""Block completions ``[[A1, X], [X^T, A2]]`` with small SNT-rank.

Exact constructions (Schur-type extension and rank-one gluing), the inertia
lower bound, and a heuristic fit over the free off-diagonal block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constructions import direct_sum
from .errors import InvariantError, RankError, ShapeError
from .matcore import MatrixLike, SymMatrix, Trifactor, as_sym, inertia, verify_trifactorization
from .search import FitOptions, _init, _run


def _verified(A: np.ndarray, F: Trifactor, tol: float) -> tuple[SymMatrix, Trifactor]:
    rep = verify_trifactorization(A, F, tol=tol * max(1.0, np.abs(A).max()))
    if not rep.valid:
        raise InvariantError(f"constructed factorization failed verification (residual {rep.max_residual:.3g})")
    return SymMatrix(A), F


def schur_completion(A1: MatrixLike, A0: MatrixLike | None, N, F1: Trifactor, F0: Trifactor | None = None):
    """``A = [[A1, A1 N], [N^T A1, A0 + N^T A1 N]]`` with ``B = [[B1, 0], [N^T B1, B0]]``, ``C = C1 (+) C0``.

    ``A0 = None`` (with ``F0 = None``) means the zero block; the factor then
    keeps ``k = F1.k``.
    """
    a1 = as_sym(A1).entries
    N = np.atleast_2d(np.asarray(N, dtype=float))
    n = a1.shape[0]
    if N.shape[0] != n:
        raise ShapeError(f"N has {N.shape[0]} rows, expected {n}")
    if N.min() < 0:
        raise InvariantError("N must be nonnegative")
    if F1.n != n:
        raise ShapeError("F1 does not match A1")
    m = N.shape[1]
    if A0 is None:
        a0 = np.zeros((m, m))
    else:
        a0 = as_sym(A0).entries
        if a0.shape != (m, m):
            raise ShapeError(f"A0 is {a0.shape}, expected {(m, m)}")
    A = np.block([[a1, a1 @ N], [N.T @ a1, a0 + N.T @ a1 @ N]])
    lower = N.T @ F1.B
    if F0 is None:
        if np.any(a0):
            raise InvariantError("a factor of A0 is required when A0 is nonzero")
        F = Trifactor(np.vstack([F1.B, lower]), F1.C)
    else:
        if F0.n != m:
            raise ShapeError("F0 does not match A0")
        F = direct_sum(F1, F0)
        B = np.array(F.B)
        B[n:, : F1.k] = lower
        F = Trifactor(B, F.C)
    return _verified(A, F, 1e-9)


@dataclass(frozen=True, eq=False)
class GlueInput:
    """``A1_hat = [[A1, a], [a^T, alpha]]`` (factored, last row distinguished) and ``A2`` with Perron pair ``(alpha, u)``."""

    A1_hat_factor: Trifactor
    A2_factor: Trifactor
    u: np.ndarray
    alpha: float

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float).ravel()
        if u.size != self.A2_factor.n:
            raise ShapeError(f"u has {u.size} entries, A2 has order {self.A2_factor.n}")
        if u.min() < 0 or abs(np.linalg.norm(u) - 1.0) > 1e-9:
            raise InvariantError("u must be a nonnegative unit vector")
        if self.alpha <= 0:
            raise InvariantError("alpha must be positive")
        corner = self.A1_hat_factor.product()[-1, -1]
        if abs(corner - self.alpha) > 1e-9 * max(1.0, self.alpha):
            raise InvariantError(f"bottom-right entry of A1_hat is {corner}, not alpha = {self.alpha}")
        if np.abs(self.A2_factor.product() @ u - self.alpha * u).max() > 1e-8 * max(1.0, self.alpha):
            raise InvariantError("(alpha, u) is not an eigenpair of A2")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def B1(self) -> np.ndarray:
        return self.A1_hat_factor.B[:-1]

    @property
    def b1(self) -> np.ndarray:
        return self.A1_hat_factor.B[-1]

    def blocks(self):
        """``A1``, ``a`` and ``A2`` read off the factors."""
        A1_hat = self.A1_hat_factor.product()
        return A1_hat[:-1, :-1], A1_hat[:-1, -1], self.A2_factor.product()


def _glued_matrix(g: GlueInput) -> np.ndarray:
    A1, a, A2 = g.blocks()
    X = np.outer(a, g.u)
    return np.block([[A1, X], [X.T, A2]])


def rank1_glue(g: GlueInput):
    """``A = [[A1, a u^T], [u a^T, A2]]`` with the block-diagonal ``B`` and coupled ``C``."""
    C1, C2, B2 = g.A1_hat_factor.C, g.A2_factor.C, g.A2_factor.B
    off = np.outer(C1 @ g.b1, C2 @ B2.T @ g.u) / g.alpha
    C = np.block([[C1, off], [off.T, C2]])
    k1, k2 = C1.shape[0], C2.shape[0]
    n1, n2 = g.B1.shape[0], B2.shape[0]
    B = np.zeros((n1 + n2, k1 + k2))
    B[:n1, :k1] = g.B1
    B[n1:, k1:] = B2
    return _verified(_glued_matrix(g), Trifactor(B, C), 1e-8)


def rank1_glue_rank1(g: GlueInput):
    """Gluing when ``A2 = alpha u u^T``: ``B = [[B1], [u b1^T]]`` keeps ``C = C1``."""
    A2 = g.A2_factor.product()
    if np.abs(A2 - g.alpha * np.outer(g.u, g.u)).max() > 1e-9 * max(1.0, g.alpha):
        raise RankError("A2 is not alpha * u u^T")
    B = np.vstack([g.B1, np.outer(g.u, g.b1)])
    return _verified(_glued_matrix(g), Trifactor(B, g.A1_hat_factor.C), 1e-9)


def completion_lower_bound(A1: MatrixLike, A2: MatrixLike) -> int:
    """``max(pi_1, pi_2) + max(nu_1, nu_2)`` from the inertias of the diagonal blocks."""
    i1, i2 = inertia(as_sym(A1)), inertia(as_sym(A2))
    return max(i1.pi_plus, i2.pi_plus) + max(i1.pi_minus, i2.pi_minus)


@dataclass(frozen=True, eq=False)
class CompletionResult:
    X: np.ndarray
    F: Trifactor
    rel_residual: float
    penalty: float
    success: bool

    @property
    def score(self) -> float:
        return self.rel_residual + self.penalty


def _completion_loss(A1, A2, eps, strict):
    n1 = A1.shape[0]

    def loss(M):
        D = np.zeros_like(M)
        E1 = A1 - M[:n1, :n1]
        E2 = A2 - M[n1:, n1:]
        D[:n1, :n1] = -2.0 * E1
        D[n1:, n1:] = -2.0 * E2
        f = np.sum(E1 * E1) + np.sum(E2 * E2)
        if strict:
            h = np.maximum(eps - M[:n1, n1:], 0.0)
            f += np.sum(h * h)
            D[:n1, n1:] = -2.0 * h
        return float(f), D

    return loss


def fit_completion(
    A1: MatrixLike,
    A2: MatrixLike,
    k: int,
    strict_positive_X: bool = False,
    opts: FitOptions = FitOptions(),
    initial=(),
) -> CompletionResult:
    """Fit ``B C B^T`` at inner dimension ``k`` to the diagonal blocks only.

    The off-diagonal block ``X`` is whatever the fit produces. With
    ``strict_positive_X`` a hinge ``max(0, eps - X)^2`` with
    ``eps = 1e-3 * max entry`` joins the loss. ``rel_residual`` is the
    diagonal-block misfit over the norm of the blocks; ``penalty`` is the
    hinge term on the same scale (zero when not strict). Success means
    ``rel_residual <= opts.tol_residual`` and, if strict, ``X >= eps``.
    """
    if k < 1:
        raise InvariantError("k must be at least 1")
    a1, a2 = as_sym(A1).entries, as_sym(A2).entries
    n1, n2 = a1.shape[0], a2.shape[0]
    norm = max(np.sqrt(np.sum(a1 * a1) + np.sum(a2 * a2)), 1e-300)
    eps = 1e-3 * max(a1.max(), a2.max())
    loss = _completion_loss(a1, a2, eps, strict_positive_X)
    fit_loss = _completion_loss(a1, a2, eps, False)

    def evaluate(B, C):
        M = B @ C @ B.T
        rel = np.sqrt(fit_loss(M)[0]) / norm
        X = M[:n1, n1:]
        pen = np.linalg.norm(np.maximum(eps - X, 0.0)) / norm if strict_positive_X else 0.0
        ok = rel <= opts.tol_residual and (not strict_positive_X or X.min() >= eps)
        return rel, pen, ok

    n = n1 + n2
    I1, J1 = np.indices((n1, n1))
    I2, J2 = np.indices((n2, n2)) + n1
    I = np.concatenate([I1.ravel(), I2.ravel()])
    J = np.concatenate([J1.ravel(), J2.ravel()])
    entries = (I, J, np.concatenate([a1.ravel(), a2.ravel()]))
    if strict_positive_X:
        hI, hJ = np.indices((n1, n2))
        entries += ((hI.ravel(), hJ.ravel() + n1, eps),)
    starts = [(np.array(F.B, dtype=float), np.array(F.C, dtype=float)) for F in initial]
    best = None
    for i in range(len(starts) + opts.restarts):
        if i < len(starts):
            B0, C0 = starts[i]
            if B0.shape != (n1 + n2, k):
                raise ShapeError(f"initial factor has B{B0.shape}, expected {(n1 + n2, k)}")
        else:
            B0, C0 = _init(n1 + n2, k, norm, np.random.default_rng(opts.seed + i - len(starts)))
        B, C, _ = _run(loss, B0, C0, opts, (opts.tol_residual * norm) ** 2, entries)
        rel, pen, ok = evaluate(B, C)
        key = (not ok, rel + pen)
        if best is None or key < best[0]:
            best = (key, B, C, rel, pen, ok)
        if ok and opts.stop_at_tol:
            break
    _, B, C, rel, pen, ok = best
    F = Trifactor(B, C)
    X = F.product()[:n1, n1:]
    return CompletionResult(X, F, float(rel), float(pen), bool(ok))
