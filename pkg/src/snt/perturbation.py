"""Perron perturbations ``A + alpha u u^T`` that factor at the rank of ``A``.

For an irreducible ``A`` with spectral data ``(lambda1, u, U1, D1)`` and a
Perron similarity ``S`` (positive first column, positive first row of the
inverse), set ``U = [u U1]`` and

    B(beta, S)        = U (beta (+) I) S^-1
    C(alpha, beta, S) = S (1/beta (+) I) (lambda1 + alpha (+) D1) (1/beta (+) I) S^T

so that ``B C B^T = A + alpha u u^T``. Both factors are affine in ``beta`` and
``alpha`` respectively along the Perron direction, which gives closed-form
minimal values keeping them nonnegative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import InvariantError, RankError, ShapeError
from .matcore import (
    MatrixLike,
    SpectralData,
    SymMatrix,
    Trifactor,
    as_sym,
    spectral_split,
    verify_trifactorization,
)

NONNEG_TOL = 1e-12
MAX_COND = 1e8


@dataclass(frozen=True, eq=False)
class PerronSimilarity:
    S: np.ndarray
    S_inv: np.ndarray
    first_col: np.ndarray
    first_row_inv: np.ndarray

    def __post_init__(self):
        S = np.atleast_2d(np.asarray(self.S, dtype=float))
        S_inv = np.atleast_2d(np.asarray(self.S_inv, dtype=float))
        if S.shape[0] != S.shape[1] or S_inv.shape != S.shape:
            raise ShapeError(f"S{S.shape} and its inverse{S_inv.shape} must be square and equal-sized")
        if np.abs(S @ S_inv - np.eye(S.shape[0])).max() >= 1e-8:
            raise InvariantError("S_inv is not the inverse of S")
        if S[:, 0].min() <= NONNEG_TOL or S_inv[0].min() <= NONNEG_TOL:
            raise InvariantError("first column of S and first row of S^-1 must be positive")
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "S_inv", S_inv)
        object.__setattr__(self, "first_col", S[:, 0].copy())
        object.__setattr__(self, "first_row_inv", S_inv[0].copy())

    @classmethod
    def from_matrix(cls, S) -> "PerronSimilarity":
        S = np.atleast_2d(np.asarray(S, dtype=float))
        return cls(S, np.linalg.inv(S), S[:, 0], None)

    @classmethod
    def from_inverse(cls, S_inv) -> "PerronSimilarity":
        S_inv = np.atleast_2d(np.asarray(S_inv, dtype=float))
        S = np.linalg.inv(S_inv)
        return cls(S, S_inv, S[:, 0], S_inv[0])

    @property
    def r(self) -> int:
        return self.S.shape[0]


@dataclass(frozen=True, eq=False)
class PerturbResult:
    alpha: float
    beta: float
    F: Trifactor
    A_perturbed: SymMatrix


def _check(sd: SpectralData, S: PerronSimilarity):
    if S.r != sd.r:
        raise ShapeError(f"similarity is {S.r}x{S.r} but the matrix has rank {sd.r}")
    if sd.u.min() <= 0:
        raise InvariantError("Perron vector is not positive; the matrix must be irreducible")


def _residual_part(sd: SpectralData, S: PerronSimilarity) -> np.ndarray:
    """``U1 S^-1[1:, :]``: the part of ``B(beta, S)`` that does not scale with ``beta``."""
    return sd.U1 @ S.S_inv[1:, :]


def _middle(sd: SpectralData, S: PerronSimilarity) -> np.ndarray:
    S1 = S.S[:, 1:]
    return (S1 * sd.D1) @ S1.T


def min_beta(sd: SpectralData, S: PerronSimilarity) -> float:
    """Smallest ``beta >= 0`` with ``B(beta, S) >= -1e-12``."""
    _check(sd, S)
    R = _residual_part(sd, S)
    lead = np.outer(sd.u, S.first_row_inv)
    neg = R < -NONNEG_TOL
    if not neg.any():
        return 0.0
    return float(max(0.0, np.max(-R[neg] / lead[neg])))


def min_alpha(sd: SpectralData, S: PerronSimilarity, beta: float) -> float:
    """Smallest ``alpha >= 0`` with ``C(alpha, beta, S) >= -1e-12``."""
    _check(sd, S)
    if beta <= 0:
        raise InvariantError(f"beta must be positive, got {beta}")
    M = _middle(sd, S)
    s1 = S.first_col
    need = -sd.lambda1 - beta**2 * M / np.outer(s1, s1)
    return float(max(0.0, need.max()))


def b_matrix(sd: SpectralData, beta: float, S: PerronSimilarity) -> np.ndarray:
    return beta * np.outer(sd.u, S.first_row_inv) + _residual_part(sd, S)


def c_matrix(sd: SpectralData, alpha: float, beta: float, S: PerronSimilarity) -> np.ndarray:
    s1 = S.first_col
    C = (sd.lambda1 + alpha) / beta**2 * np.outer(s1, s1) + _middle(sd, S)
    return (C + C.T) / 2.0


def _beta_alpha(sd: SpectralData, S: PerronSimilarity, margin: float = 0.0):
    beta = min_beta(sd, S)
    if beta == 0.0:
        # B >= 0 for every beta > 0 and alpha only grows with beta, so take
        # the largest beta <= 1 that still needs no perturbation.
        M = _middle(sd, S)
        s1 = S.first_col
        neg = M < 0
        ratio = sd.lambda1 * np.outer(s1, s1)[neg] / -M[neg]
        beta = float(min(1.0, np.sqrt(ratio.min()))) if neg.any() else 1.0
    beta += margin
    alpha = min_alpha(sd, S, beta) + margin
    return beta, alpha


def _clamp(x: np.ndarray) -> np.ndarray:
    x = x.copy()
    x[(x < 0) & (x >= -1e-9 * max(1.0, np.abs(x).max()))] = 0.0
    return x


def perturb_factorization(
    A: MatrixLike, S: PerronSimilarity | None = None, *, spectral: SpectralData | None = None, margin: float = 0.0
) -> PerturbResult:
    """Minimal ``(beta, alpha)`` for ``S`` and the factorization of ``A + alpha u u^T``.

    ``spectral`` pins the eigenbasis ``U1``; it defaults to :func:`spectral_split`.
    A positive ``margin`` is added to both minima to land strictly inside.
    For rank one, ``S`` is ignored and ``(u, [lambda1])`` is returned with ``alpha = 0``.
    """
    a = as_sym(A)
    sd = spectral if spectral is not None else spectral_split(a)
    if sd.r == 1:
        F = Trifactor(sd.u.reshape(-1, 1), [[sd.lambda1]])
        return PerturbResult(0.0, 1.0, F, a)
    if S is None:
        raise InvariantError("a Perron similarity is required when rank > 1")
    beta, alpha = _beta_alpha(sd, S, margin)
    F = Trifactor(_clamp(b_matrix(sd, beta, S)), _clamp(c_matrix(sd, alpha, beta, S)))
    target = a.entries + alpha * np.outer(sd.u, sd.u)
    rep = verify_trifactorization(target, F, tol=1e-9 * max(1.0, np.abs(target).max()))
    if not rep.valid:
        raise InvariantError(f"perturbed factorization failed verification (residual {rep.max_residual:.3g})")
    return PerturbResult(alpha, beta, F, SymMatrix(target))


def random_similarity(r: int, rng: np.random.Generator) -> PerronSimilarity:
    """Orthogonal ``Q`` whose first column is a random positive unit vector."""
    q1 = rng.uniform(0.1, 1.0, r)
    q1 /= np.linalg.norm(q1)
    Q, _ = np.linalg.qr(np.column_stack([q1, rng.standard_normal((r, r - 1))]))
    if Q[0, 0] < 0:
        Q = -Q
    return PerronSimilarity(Q, Q.T, None, None)


def _objective(sd: SpectralData, x: np.ndarray, r: int) -> float:
    S = x.reshape(r, r)
    if not np.all(np.isfinite(S)) or np.linalg.cond(S) > MAX_COND:
        return np.inf
    try:
        return _beta_alpha(sd, PerronSimilarity.from_matrix(S))[1]
    except (InvariantError, np.linalg.LinAlgError):
        return np.inf


def optimize_S(
    A: MatrixLike,
    budget: int = 2000,
    seed: int = 0,
    initial=(),
    spectral: SpectralData | None = None,
) -> tuple[PerronSimilarity, float]:
    """Randomized search for a similarity with small ``alpha``.

    A tenth of ``budget`` (at least one, at most 200) goes to random
    orthogonal candidates; the rest refines the best candidate so far with
    Nelder-Mead, restarting from the incumbent while evaluations remain.
    Candidates from ``initial`` join the pool, so the result is never worse
    than the best of them. No optimality claim is made.
    """
    if budget <= 0:
        raise InvariantError("budget must be positive")
    a = as_sym(A)
    sd = spectral if spectral is not None else spectral_split(a)
    r = sd.r
    if r == 1:
        return PerronSimilarity(np.eye(1), np.eye(1), None, None), 0.0
    rng = np.random.default_rng(seed)
    pool = [S if isinstance(S, PerronSimilarity) else PerronSimilarity.from_matrix(S) for S in initial]
    n_random = int(min(200, max(1, budget // 10)))
    pool += [random_similarity(r, rng) for _ in range(n_random)]
    scores = [_objective(sd, S.S.ravel(), r) for S in pool]
    best = int(np.argmin(scores))
    best_x, best_f = pool[best].S.ravel().copy(), scores[best]
    left = budget - n_random
    while left > 0 and best_f > 0:
        res = minimize(
            lambda x: _objective(sd, x, r),
            best_x,
            method="Nelder-Mead",
            options={"maxfev": left, "xatol": 1e-10, "fatol": 1e-12, "adaptive": True},
        )
        left -= res.nfev
        if res.fun < best_f - 1e-12:
            best_x, best_f = res.x.copy(), float(res.fun)
        else:
            break
    return PerronSimilarity.from_matrix(best_x.reshape(r, r)), float(best_f)


@dataclass(frozen=True, eq=False)
class SimilarityReport:
    T: np.ndarray
    T_inv: np.ndarray
    b_residual: float
    c_residual: float
    first_col_nonneg: bool
    first_row_inv_nonneg: bool


def extract_similarity(sd: SpectralData, F: Trifactor) -> SimilarityReport:
    """Recover ``T`` with ``B = U T^-1`` and ``C = T (lambda1 (+) D1) T^T``."""
    if F.k != sd.r:
        raise RankError(f"factor has k = {F.k}, expected the rank {sd.r}")
    U = sd.U
    T_inv = U.T @ F.B
    b_res = float(np.abs(U @ T_inv - F.B).max())
    if b_res > 1e-6:
        raise InvariantError(f"B is not in the column space of the eigenbasis (residual {b_res:.3g})")
    T = np.linalg.inv(T_inv)
    lam = np.concatenate([[sd.lambda1], sd.D1])
    c_res = float(np.abs((T * lam) @ T.T - F.C).max())
    tol = 1e-9 * max(1.0, np.abs(T).max(), np.abs(T_inv).max())
    return SimilarityReport(
        T,
        T_inv,
        b_res,
        c_res,
        bool(T[:, 0].min() >= -tol),
        bool(T_inv[0].min() >= -tol),
    )
