"""Cyclic Jacobi eigensolver for dense real symmetric matrices."""

from __future__ import annotations

import math

import numpy as np

from .errors import ShapeError


def jacobi_eigh(a, tol: float = 1e-12, max_sweeps: int = 100):
    """Eigen-decompose a real symmetric matrix by cyclic Jacobi rotations.

    Rotations are applied in row-major order over the strict upper triangle.
    Sweeps stop once the off-diagonal Frobenius norm drops below
    ``tol * ||a||_F``.

    Parameters
    ----------
    a : array_like, shape (n, n)
        Symmetric input. Only the symmetrized part ``(a + a.T) / 2`` is used.
    tol : float
        Relative stopping threshold.
    max_sweeps : int
        Hard cap on the number of full sweeps.

    Returns
    -------
    w : ndarray, shape (n,)
        Eigenvalues in decreasing order.
    v : ndarray, shape (n, n)
        Orthonormal eigenvectors, ``v[:, i]`` belongs to ``w[i]``.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {a.shape}")
    a = (a + a.T) / 2.0
    n = a.shape[0]
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if n < 2 or scale == 0.0:
        return _sorted(np.diag(a).copy(), v)

    target = tol * scale
    for _ in range(max_sweeps):
        off = math.sqrt(2.0 * np.sum(np.triu(a, 1) ** 2))
        if off < target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                diff = a[q, q] - a[p, p]
                if abs(apq) < 1e-150 * abs(diff):
                    # rotation angle underflows; the entry is negligible
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = diff / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c

                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0

                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq

    return _sorted(np.diag(a).copy(), v)


def _sorted(w, v):
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]
