"""Classical multidimensional scaling into the plane.

Double-centers the squared distance matrix and diagonalizes it with a
cyclic Jacobi sweep; the two leading nonnegative eigenpairs give the
embedding.  Signs are fixed so that the first nonzero entry of each
coordinate column is positive.
"""

from __future__ import annotations

import warnings

import numpy as np

_JACOBI_TOL = 1e-12


def _jacobi_eigh(a: np.ndarray, tol: float = _JACOBI_TOL, max_sweeps: int = 100):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations."""
    n = a.shape[0]
    v = np.eye(n)
    a = a.copy()
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) <= tol * 1e-3:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta**2 + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t**2 + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                v = v @ rot
    return np.diag(a).copy(), v


def mds_embed(matrix) -> np.ndarray:
    """n x 2 planar coordinates whose pairwise distances approximate the
    input matrix.

    The matrix must be symmetric with a zero diagonal.  When no positive
    eigenvalue exists the embedding collapses to zeros with a warning.
    """
    d = np.asarray(matrix, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError("distance matrix must be square")
    n = d.shape[0]
    if not np.allclose(d, d.T, atol=1e-9):
        raise ValueError("distance matrix must be symmetric")
    if not np.allclose(np.diag(d), 0.0, atol=1e-9):
        raise ValueError("distance matrix must have a zero diagonal")
    if n == 1:
        return np.zeros((1, 2))
    j = np.eye(n) - np.ones((n, n)) / n
    b = -0.5 * j @ (d**2) @ j
    eigvals, eigvecs = _jacobi_eigh(b)
    order = np.argsort(eigvals)[::-1]
    coords = np.zeros((n, 2))
    placed = 0
    for idx in order:
        if placed == 2:
            break
        lam = eigvals[idx]
        if lam <= 0.0:
            break
        coords[:, placed] = eigvecs[:, idx] * np.sqrt(lam)
        placed += 1
    if placed == 0:
        warnings.warn("no positive eigenvalue; returning a zero embedding")
        return coords
    for col in range(2):
        column = coords[:, col]
        nz = np.nonzero(np.abs(column) > 1e-12)[0]
        if nz.size and column[nz[0]] < 0:
            coords[:, col] = -column
    return coords
