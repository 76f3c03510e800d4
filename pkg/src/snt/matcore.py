"""Core matrix types, factorization checks, and spectral/combinatorial primitives."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import InvariantError, ReducibleError, ShapeError
from .jacobi import jacobi_eigh

SYM_TOL = 1e-10


def _readonly(x: np.ndarray) -> np.ndarray:
    x.setflags(write=False)
    return x


@dataclass(frozen=True, eq=False)
class SymMatrix:
    """Dense symmetric nonnegative matrix.

    Entries in ``[-sym_tol, 0)`` are clamped to zero; anything more negative,
    or an asymmetry beyond ``sym_tol``, raises :class:`InvariantError`.
    The stored array is symmetrized and read-only.
    """

    entries: np.ndarray
    sym_tol: float = SYM_TOL

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise ShapeError(f"expected a nonempty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvariantError("matrix has non-finite entries")
        asym = np.abs(a - a.T).max()
        if asym > self.sym_tol:
            raise InvariantError(f"matrix is not symmetric (max |a_ij - a_ji| = {asym:.3g})")
        a = (a + a.T) / 2.0
        low = a.min()
        if low < -self.sym_tol:
            raise InvariantError(f"matrix has a negative entry ({low:.3g})")
        a[a < 0] = 0.0
        object.__setattr__(self, "entries", _readonly(a))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.entries
        return self.entries.astype(dtype)

    def __repr__(self):
        return f"SymMatrix(n={self.n})"


MatrixLike = Union[SymMatrix, np.ndarray, list]


def as_sym(a: MatrixLike, sym_tol: float = SYM_TOL) -> SymMatrix:
    if isinstance(a, SymMatrix):
        return a
    return SymMatrix(np.asarray(a, dtype=float), sym_tol=sym_tol)


@dataclass(frozen=True, eq=False)
class Trifactor:
    """A pair ``(B, C)`` standing for the product ``B @ C @ B.T``.

    ``B`` is n-by-k and nonnegative, ``C`` is k-by-k, symmetric and nonnegative.
    Negative dust down to ``-tol`` (relative to the largest entry, with a floor
    of 1) is clamped to zero; ``C`` is stored symmetrized.
    """

    B: np.ndarray
    C: np.ndarray
    tol: float = SYM_TOL

    def __post_init__(self):
        b = np.array(self.B, dtype=float)
        c = np.array(self.C, dtype=float)
        if b.ndim == 1:
            b = b.reshape(-1, 1)
        if c.ndim == 0:
            c = c.reshape(1, 1)
        if b.ndim != 2 or c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ShapeError(f"bad factor shapes B{b.shape}, C{c.shape}")
        if b.shape[1] != c.shape[0] or c.shape[0] < 1:
            raise ShapeError(f"inner dimensions disagree: B{b.shape}, C{c.shape}")
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise InvariantError("factor has non-finite entries")
        cscale = max(1.0, np.abs(c).max())
        if np.abs(c - c.T).max() > self.tol * cscale:
            raise InvariantError("C is not symmetric")
        c = (c + c.T) / 2.0
        for name, x in (("B", b), ("C", c)):
            floor = -self.tol * max(1.0, np.abs(x).max())
            if x.size and x.min() < floor:
                raise InvariantError(f"{name} has a negative entry ({x.min():.3g})")
            x[x < 0] = 0.0
        object.__setattr__(self, "B", _readonly(b))
        object.__setattr__(self, "C", _readonly(c))

    @property
    def n(self) -> int:
        return self.B.shape[0]

    @property
    def k(self) -> int:
        return self.C.shape[0]

    def product(self) -> np.ndarray:
        p = self.B @ self.C @ self.B.T
        return (p + p.T) / 2.0

    def __repr__(self):
        return f"Trifactor(n={self.n}, k={self.k})"


@dataclass(frozen=True)
class Inertia:
    pi_plus: int
    pi_minus: int
    pi_zero: int

    def __iter__(self):
        return iter((self.pi_plus, self.pi_minus, self.pi_zero))


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Perron pair plus the remaining nonzero eigenpairs of a symmetric matrix.

    ``lambda1 * u u^T + U1 diag(D1) U1^T`` reconstructs the matrix. When some
    non-Perron eigenvalue is repeated, ``U1`` is only one of many valid bases;
    use :meth:`from_basis` to pin a particular one.
    """

    lambda1: float
    u: np.ndarray
    U1: np.ndarray
    D1: np.ndarray

    @property
    def r(self) -> int:
        return 1 + len(self.D1)

    @property
    def U(self) -> np.ndarray:
        return np.column_stack([self.u, self.U1])

    def reconstruct(self) -> np.ndarray:
        return self.lambda1 * np.outer(self.u, self.u) + (self.U1 * self.D1) @ self.U1.T

    @classmethod
    def from_basis(cls, A: MatrixLike, u, U1) -> "SpectralData":
        """Build from a caller-chosen orthonormal eigenbasis.

        Eigenvalues are read off as Rayleigh quotients; the basis is checked
        to be orthonormal and to reproduce ``A``.
        """
        a = as_sym(A).entries
        u = np.asarray(u, dtype=float).ravel()
        U1 = np.asarray(U1, dtype=float).reshape(len(u), -1)
        U = np.column_stack([u, U1])
        if np.abs(U.T @ U - np.eye(U.shape[1])).max() > 1e-8:
            raise InvariantError("basis is not orthonormal")
        lam = U.T @ a @ U
        if np.abs(lam - np.diag(np.diag(lam))).max() > 1e-8 * max(1.0, np.linalg.norm(a)):
            raise InvariantError("basis does not diagonalize the matrix")
        sd = cls(float(lam[0, 0]), u, U1, np.diag(lam)[1:].copy())
        if np.abs(sd.reconstruct() - a).max() > sd.r * 1e-8 * max(1.0, np.linalg.norm(a)):
            raise InvariantError("basis does not span the column space")
        return sd


@dataclass(frozen=True)
class VerifyReport:
    valid: bool
    max_residual: float
    nonneg_ok: bool
    symmetry_ok: bool


def eigh(A: MatrixLike):
    """Eigenvalues (decreasing) and eigenvectors of a symmetric matrix."""
    return jacobi_eigh(np.asarray(as_sym(A).entries))


def _threshold(w: np.ndarray, n: int, tol: float | None) -> float:
    lmax = np.abs(w).max() if len(w) else 0.0
    if tol is None:
        tol = n * 1e-12
    return tol * max(1.0, lmax)


def verify_trifactorization(A: MatrixLike, F, tol: float = 1e-9) -> VerifyReport:
    """Check that ``F`` is an SN-Trifactorization of ``A`` up to ``tol``.

    ``F`` is a :class:`Trifactor` or a raw ``(B, C)`` pair; raw pairs are
    inspected for negativity and symmetry instead of being rejected.
    """
    a = as_sym(A).entries
    if isinstance(F, Trifactor):
        B, C = F.B, F.C
    else:
        B, C = (np.asarray(x, dtype=float) for x in F)
        if B.ndim == 1:
            B = B.reshape(-1, 1)
        C = np.atleast_2d(C)
    if B.ndim != 2 or C.ndim != 2 or B.shape[0] != a.shape[0]:
        raise ShapeError(f"B has shape {B.shape}, expected {a.shape[0]} rows")
    if C.shape != (B.shape[1], B.shape[1]):
        raise ShapeError(f"C has shape {C.shape}, expected {(B.shape[1],) * 2}")
    nonneg_ok = bool(B.min() >= 0.0 and C.min() >= 0.0)
    symmetry_ok = bool(np.abs(C - C.T).max() <= tol)
    resid = float(np.abs(a - B @ C @ B.T).max())
    return VerifyReport(resid <= tol and nonneg_ok and symmetry_ok, resid, nonneg_ok, symmetry_ok)


def numerical_rank(A: MatrixLike, tol: float | None = None) -> int:
    """Count eigenvalues with ``|lambda| > tol * max(1, |lambda|_max)``.

    The default ``tol`` is ``n * 1e-12``.
    """
    a = as_sym(A)
    w, _ = eigh(a)
    return int(np.sum(np.abs(w) > _threshold(w, a.n, tol)))


def inertia(A: MatrixLike, tol: float | None = None) -> Inertia:
    """Counts of positive, negative and zero eigenvalues.

    Plain arrays may have entries of either sign; they only need to be symmetric.
    """
    m = A.entries if isinstance(A, SymMatrix) else np.asarray(A, dtype=float)
    w, _ = jacobi_eigh(m)
    thr = _threshold(w, m.shape[0], tol)
    plus = int(np.sum(w > thr))
    minus = int(np.sum(w < -thr))
    return Inertia(plus, minus, m.shape[0] - plus - minus)


def support_pattern(A: MatrixLike, tol: float = SYM_TOL) -> np.ndarray:
    return np.abs(np.asarray(A, dtype=float)) > tol


def is_irreducible(A: MatrixLike, tol: float = 0.0) -> bool:
    """Connectivity of the support graph, by breadth-first search."""
    pattern = support_pattern(as_sym(A).entries, tol)
    n = pattern.shape[0]
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j in np.flatnonzero(pattern[i] & ~seen):
            seen[j] = True
            queue.append(j)
    return bool(seen.all())


def perron(A: MatrixLike):
    """Perron eigenvalue and unit eigenvector of an irreducible matrix."""
    a = as_sym(A)
    if not is_irreducible(a):
        raise ReducibleError("Perron vector requested for a reducible matrix")
    w, v = eigh(a)
    return float(w[0]), _fix_sign(v[:, 0])


def _fix_sign(u: np.ndarray) -> np.ndarray:
    u = u.copy()
    if u[np.argmax(np.abs(u))] < 0:
        u = -u
    return u


def spectral_split(A: MatrixLike, tol: float | None = None) -> SpectralData:
    """Split an irreducible matrix into its Perron part and the other nonzero eigenpairs."""
    a = as_sym(A)
    if not is_irreducible(a):
        raise ReducibleError("spectral split requested for a reducible matrix")
    w, v = eigh(a)
    thr = _threshold(w, a.n, tol)
    u = _fix_sign(v[:, 0])
    rest = [i for i in range(1, a.n) if abs(w[i]) > thr]
    U1 = v[:, rest].reshape(a.n, len(rest))
    return SpectralData(float(w[0]), u, U1, w[rest].copy())


def apply_scaling(F: Trifactor, perm, d) -> Trifactor:
    """Return ``(B P D, D^-1 P^T C P D^-1)``, which has the same product.

    ``perm`` lists, for each new column, the old column it comes from.
    """
    perm = np.asarray(perm, dtype=int)
    d = np.asarray(d, dtype=float)
    if sorted(perm.tolist()) != list(range(F.k)):
        raise InvariantError(f"{perm.tolist()} is not a permutation of range({F.k})")
    if d.shape != (F.k,) or np.any(d <= 0):
        raise InvariantError("scaling vector must be strictly positive with one entry per column")
    B = F.B[:, perm] * d
    C = F.C[np.ix_(perm, perm)] / np.outer(d, d)
    return Trifactor(B, C)


def identity_factor(A: MatrixLike) -> Trifactor:
    """The trivial factorization ``A = I A I^T``."""
    a = as_sym(A)
    return Trifactor(np.eye(a.n), a.entries)
