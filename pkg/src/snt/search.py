"""Numerical upper bounds on the SNT-rank and combinatorial lower bounds.

Upper bounds come from projected-gradient fits of ``B C B^T``; a fit that
succeeds at ``k`` is a factorization, a fit that fails is only evidence.
Lower bounds come from the rank and from the Boolean rank of the support.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.optimize import least_squares

from .errors import InvariantError
from .matcore import (
    Inertia,
    MatrixLike,
    Trifactor,
    as_sym,
    identity_factor,
    inertia,
    numerical_rank,
    support_pattern,
    verify_trifactorization,
)


@dataclass(frozen=True)
class FitOptions:
    restarts: int = 30
    max_iters: int = 5000
    tol_residual: float = 1e-7
    seed: int = 0
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    stop_at_tol: bool = True
    # with polish, projected gradient stops after polish_after sweeps and
    # bounded least squares (at most polish_evals evaluations) takes over
    polish: bool = True
    polish_after: int = 500
    polish_evals: int = 300

    def __post_init__(self):
        if self.restarts < 1 or self.max_iters < 1:
            raise InvariantError("restarts and max_iters must be at least 1")
        if not 0.0 < self.backtrack < 1.0:
            raise InvariantError("backtrack factor must lie in (0, 1)")


class FitResult(NamedTuple):
    factor: Trifactor
    rel_residual: float


# A loss maps the product M = B C B^T to (value, dF/dM).
Loss = Callable[[np.ndarray], "tuple[float, np.ndarray]"]


def frobenius_loss(A: np.ndarray) -> Loss:
    def loss(M):
        E = A - M
        return float(np.sum(E * E)), -2.0 * E

    return loss


def trifactor_gradients(D: np.ndarray, B: np.ndarray, C: np.ndarray):
    """Gradients in ``B`` and ``C`` of a loss whose derivative in ``M = B C B^T`` is ``D``."""
    gB = (D + D.T) @ B @ C
    gC = B.T @ D @ B
    return gB, (gC + gC.T) / 2.0


def objective_gradients(A, B, C):
    """``f = ||A - B C B^T||_F^2`` with ``grad_B = -4 E B C`` and ``grad_C = -2 B^T E B``."""
    A, B, C = (np.asarray(x, dtype=float) for x in (A, B, C))
    E = A - B @ C @ B.T
    gC = -2.0 * B.T @ E @ B
    return float(np.sum(E * E)), -4.0 * E @ B @ C, (gC + gC.T) / 2.0


def _init(n: int, k: int, scale: float, rng: np.random.Generator):
    B = rng.uniform(size=(n, k))
    C = rng.uniform(size=(k, k))
    C = (C + C.T) / 2.0
    p = np.linalg.norm(B @ C @ B.T)
    if p > 0 and scale > 0:
        B *= np.sqrt(scale / p)
    return B, C


def projected_gradient(loss: Loss, B, C, opts: FitOptions, target: float = 0.0):
    """Alternate Armijo projected-gradient steps in ``B`` and in ``C``.

    Stops after ``opts.max_iters`` sweeps, when the loss drops to ``target``,
    or when a 500-sweep window improves it by less than one part in 1e12.
    """
    B, C = B.copy(), C.copy()
    f, D = loss(B @ C @ B.T)
    steps = [1.0, 1.0]
    window_f = f
    for it in range(opts.max_iters):
        for which in (0, 1):
            gB, gC = trifactor_gradients(D, B, C)
            t = steps[which] * 2.0
            while True:
                if which == 0:
                    Bn, Cn = np.maximum(B - t * gB, 0.0), C
                    decrease = np.sum(gB * (Bn - B))
                else:
                    Cn = np.maximum(C - t * gC, 0.0)
                    Cn = (Cn + Cn.T) / 2.0
                    Bn = B
                    decrease = np.sum(gC * (Cn - C))
                fn, Dn = loss(Bn @ Cn @ Bn.T)
                if fn <= f + opts.armijo_c * decrease:
                    B, C, f, D = Bn, Cn, fn, Dn
                    break
                t *= opts.backtrack
                if t < 1e-20:
                    break
            steps[which] = t
        if f <= target:
            break
        if it % 500 == 499:
            if window_f - f <= 1e-12 * window_f:
                break
            window_f = f
    return B, C, f


def _entry_jacobian(B: np.ndarray, C: np.ndarray, I: np.ndarray, J: np.ndarray) -> np.ndarray:
    """Derivatives of ``M[I, J]`` (``M = B C B^T``) in ``vec(B)`` and the upper triangle of ``C``."""
    n, k = B.shape
    P = len(I)
    G = B @ C
    p = np.arange(P)
    JB = np.zeros((P, n, k))
    JB[p, I, :] += G[J]
    JB[p, J, :] += G[I]
    O = B[I][:, :, None] * B[J][:, None, :]
    O = O + O.transpose(0, 2, 1)
    iu = np.triu_indices(k)
    JC = O[:, iu[0], iu[1]]
    JC[:, iu[0] == iu[1]] /= 2.0
    return np.hstack([JB.reshape(P, n * k), JC])


def polish(B, C, I, J, target, hinge=None, max_nfev: int = 300):
    """Bounded least-squares refinement of ``M[I, J] ~ target`` over ``B, C >= 0``.

    Projected gradient crawls once the iterate nears a face of the
    nonnegative orthant; a trust-region reflective solver
    (:func:`scipy.optimize.least_squares`) finishes the job. ``hinge``
    optionally adds terms ``max(0, eps - M[hI, hJ])`` as ``(hI, hJ, eps)``.
    """
    n, k = B.shape
    iu = np.triu_indices(k)
    I, J = np.asarray(I), np.asarray(J)

    def unpack(x):
        Bx = x[: n * k].reshape(n, k)
        Cx = np.zeros((k, k))
        Cx[iu] = x[n * k :]
        return Bx, Cx + np.triu(Cx, 1).T

    def fun(x):
        Bx, Cx = unpack(x)
        M = Bx @ Cx @ Bx.T
        r = M[I, J] - target
        if hinge is not None:
            hI, hJ, eps = hinge
            r = np.concatenate([r, np.maximum(eps - M[hI, hJ], 0.0)])
        return r

    def jac(x):
        Bx, Cx = unpack(x)
        D = _entry_jacobian(Bx, Cx, I, J)
        if hinge is not None:
            hI, hJ, eps = hinge
            active = (eps - (Bx @ Cx @ Bx.T)[hI, hJ]) > 0
            D = np.vstack([D, -_entry_jacobian(Bx, Cx, hI, hJ) * active[:, None]])
        return D

    x0 = np.concatenate([np.maximum(B, 0.0).ravel(), np.maximum(C, 0.0)[iu]])
    res = least_squares(
        fun, x0, jac=jac, bounds=(0.0, np.inf), method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=max_nfev
    )
    Bx, Cx = unpack(np.maximum(res.x, 0.0))
    return Bx, Cx


def _run(loss: Loss, B0, C0, opts: FitOptions, target: float, entries):
    """Projected gradient, then (optionally) least-squares polishing; keeps the better end point."""
    if not opts.polish:
        return projected_gradient(loss, B0, C0, opts, target)
    pg = FitOptions(**{**opts.__dict__, "max_iters": min(opts.max_iters, opts.polish_after)})
    B, C, f = projected_gradient(loss, B0, C0, pg, target)
    if f <= target:
        return B, C, f
    Bp, Cp = polish(B, C, *entries, max_nfev=opts.polish_evals)
    fp = loss(Bp @ Cp @ Bp.T)[0]
    return (Bp, Cp, fp) if fp < f else (B, C, f)


def fit_trifactorization(A: MatrixLike, k: int, opts: FitOptions = FitOptions(), initial=()) -> FitResult:
    """Best nonnegative ``B C B^T`` approximation of ``A`` with inner dimension ``k``.

    Restart ``i`` draws from ``seed + i``; ``initial`` trifactors are tried
    first. With ``opts.stop_at_tol`` the first restart reaching
    ``opts.tol_residual`` wins, otherwise the smallest residual (ties by
    restart index).
    """
    if k < 1:
        raise InvariantError("k must be at least 1")
    a = as_sym(A).entries
    n = a.shape[0]
    norm = np.linalg.norm(a)
    ref = max(norm, 1e-300)
    loss = frobenius_loss(a)
    I, J = np.indices((n, n))
    entries = (I.ravel(), J.ravel(), a.ravel())
    target = (opts.tol_residual * ref) ** 2 if opts.stop_at_tol else 0.0
    starts = [(np.array(F.B, dtype=float), np.array(F.C, dtype=float)) for F in initial]
    best = None
    for i in range(len(starts) + opts.restarts):
        if i < len(starts):
            B0, C0 = starts[i]
        else:
            B0, C0 = _init(n, k, norm, np.random.default_rng(opts.seed + i - len(starts)))
        B, C, f = _run(loss, B0, C0, opts, target, entries)
        rel = np.sqrt(f) / ref
        if best is None or rel < best[0]:
            best = (rel, B, C)
        if opts.stop_at_tol and rel <= opts.tol_residual:
            break
    rel, B, C = best
    return FitResult(Trifactor(B, C), float(rel))


@dataclass(frozen=True)
class UpperBound:
    k: int
    factor: Trifactor
    per_k: tuple = ()
    from_fit: bool = True


def snt_upper_bound(A: MatrixLike, opts: FitOptions = FitOptions()) -> UpperBound:
    """Smallest ``k`` in ``[rank, n)`` where a fit succeeds, else ``n`` via ``(I, A)``."""
    a = as_sym(A)
    n = a.n
    norm = max(np.linalg.norm(a.entries), 1e-300)
    per_k = []
    for k in range(max(1, numerical_rank(a)), n):
        fit = fit_trifactorization(a, k, opts)
        per_k.append({"k": k, "residual": fit.rel_residual})
        if fit.rel_residual <= opts.tol_residual:
            rep = verify_trifactorization(a, fit.factor, tol=opts.tol_residual * norm)
            if rep.valid:
                return UpperBound(k, fit.factor, tuple(per_k), True)
    per_k.append({"k": n, "residual": 0.0})
    return UpperBound(n, identity_factor(a), tuple(per_k), False)


def _maximal_bicliques(P: np.ndarray) -> list[int]:
    """Maximal all-ones submatrices of ``P`` as bitmasks over ``P.ravel()``."""
    n, m = P.shape
    found = set()
    for rows in range(1, 1 << n):
        R = [i for i in range(n) if rows >> i & 1]
        cols = np.flatnonzero(P[R].all(axis=0))
        if cols.size == 0:
            continue
        R = np.flatnonzero(P[:, cols].all(axis=1))
        mask = 0
        for i in R:
            for j in cols:
                mask |= 1 << (int(i) * m + int(j))
        found.add(mask)
    return sorted(found)


def boolean_rank(pattern, max_k: int = 8) -> int:
    """Minimal number of all-ones submatrices covering the true entries.

    Iterative deepening over the first uncovered entry, branching on the
    maximal bicliques through it. Returns ``max_k + 1`` to mean "more than
    ``max_k``". Exhaustive over row subsets, so limited to 8 rows.
    """
    P = np.asarray(pattern, dtype=bool)
    if P.ndim != 2:
        raise InvariantError("pattern must be a 2-D boolean matrix")
    if P.shape[0] > 8 and P.shape[1] > 8:
        raise InvariantError("boolean_rank is exhaustive and limited to patterns with at most 8 rows or columns")
    if P.shape[0] > 8:
        P = P.T
    if not P.any():
        return 0
    full = 0
    for idx in np.flatnonzero(P.ravel()):
        full |= 1 << int(idx)
    bicliques = _maximal_bicliques(P)
    through = {}
    for idx in np.flatnonzero(P.ravel()):
        bit = 1 << int(idx)
        through[bit] = [b for b in bicliques if b & bit]

    def search(covered: int, depth: int, seen: set) -> bool:
        if covered == full:
            return True
        if depth == 0 or (covered, depth) in seen:
            return False
        seen.add((covered, depth))
        left = full & ~covered
        bit = left & -left
        return any(search(covered | b, depth - 1, seen) for b in through[bit])

    for k in range(1, max_k + 1):
        if search(0, k, set()):
            return k
    return max_k + 1


@dataclass
class BoundReport:
    rank_lb: int
    bool_rank_lb: int
    inertia_pair: Inertia
    upper_n: int
    upper_fit: int | None
    interval: tuple[int, int]
    notes: dict = field(default_factory=dict)
    per_k: tuple = ()


def bounds_report(A: MatrixLike, opts: FitOptions = FitOptions(), fit: bool = True) -> BoundReport:
    """Interval for the SNT-rank from rank, Boolean rank and fitting."""
    a = as_sym(A)
    n = a.n
    rank = numerical_rank(a)
    notes = {
        "rank_lb": "numerical rank; rk(A) <= st+(A)",
        "upper_n": "trivial factorization (I, A)",
        "cp": "unknown; not computed",
    }
    P = support_pattern(a)
    if min(P.shape) <= 8:
        brank = boolean_rank(P)
        notes["bool_rank_lb"] = "Boolean rank of the support; bounds rk+(A) <= st+(A)"
    else:
        brank = 0
        notes["bool_rank_lb"] = "skipped: pattern larger than 8x8"
    upper_fit = None
    per_k: tuple = ()
    if fit:
        ub = snt_upper_bound(a, opts)
        per_k = ub.per_k
        if ub.from_fit:
            upper_fit = ub.k
            notes["upper_fit"] = f"projected-gradient fit verified at k = {ub.k}"
        else:
            notes["upper_fit"] = "no fit below n succeeded (evidence only)"
    lb = max(rank, brank)
    ubound = min(n, upper_fit if upper_fit is not None else n)
    if lb > ubound:
        raise InvariantError(f"bounds are inconsistent: lower {lb} > upper {ubound}")
    return BoundReport(rank, brank, inertia(a), n, upper_fit, (lb, ubound), notes, per_k)
