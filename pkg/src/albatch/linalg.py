"""Dense symmetric linear algebra: SPD solves and symmetric eigensystems.

Small-matrix routines (dimension up to a few dozen) backing the ridge
normal equations and the PCA covariance eigenproblem.  Plain float64
numpy throughout; no external solver dependencies.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "EigenConvergenceError",
    "NotPositiveDefiniteError",
    "spd_solve",
    "sym_eig",
]

JACOBI_TOLERANCE = 1e-12
JACOBI_MAX_SWEEPS = 100


class NotPositiveDefiniteError(ValueError):
    """A Cholesky pivot was not strictly positive."""


class EigenConvergenceError(RuntimeError):
    """The Jacobi sweep budget was exhausted before convergence."""


def _as_square_symmetric(A, tol: float = 1e-10) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix contains non-finite entries")
    scale = max(1.0, float(np.max(np.abs(A))))
    if float(np.max(np.abs(A - A.T))) > tol * scale:
        raise ValueError("matrix is not symmetric")
    return A


def _cholesky(A: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    L = np.zeros((n, n))
    for j in range(n):
        pivot = A[j, j] - L[j, :j] @ L[j, :j]
        if pivot <= 0.0:
            raise NotPositiveDefiniteError(
                f"non-positive pivot {pivot:.3e} at row {j}; matrix is not positive-definite"
            )
        ljj = math.sqrt(pivot)
        L[j, j] = ljj
        if j + 1 < n:
            L[j + 1 :, j] = (A[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / ljj
    return L


def spd_solve(A, b) -> np.ndarray:
    """Solve ``A x = b`` for symmetric positive-definite ``A`` via Cholesky."""
    A = _as_square_symmetric(A)
    b = np.asarray(b, dtype=float)
    n = A.shape[0]
    if b.shape != (n,):
        raise ValueError(f"right-hand side has shape {b.shape}, expected ({n},)")
    if not np.all(np.isfinite(b)):
        raise ValueError("right-hand side contains non-finite entries")
    L = _cholesky(A)
    # forward substitution L y = b, then back substitution L^T x = y
    y = np.empty(n)
    for i in range(n):
        y[i] = (b[i] - L[i, :i] @ y[:i]) / L[i, i]
    x = np.empty(n)
    for i in range(n - 1, -1, -1):
        x[i] = (y[i] - L[i + 1 :, i] @ x[i + 1 :]) / L[i, i]
    return x


def sym_eig(A, tol: float = JACOBI_TOLERANCE, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues sorted in
    descending order and eigenvectors as the corresponding orthonormal
    columns.  Convergence is declared when the off-diagonal Frobenius norm
    drops below ``tol`` relative to the initial Frobenius norm.
    """
    A = _as_square_symmetric(A).copy()
    n = A.shape[0]
    V = np.eye(n)
    if n == 1:
        return np.array([A[0, 0]]), V
    scale = float(np.linalg.norm(A))
    if scale == 0.0:
        return np.zeros(n), V
    index = np.arange(n)
    converged = False
    for _ in range(max_sweeps):
        off_sq = float(np.sum(A * A) - np.sum(np.diag(A) ** 2))
        if math.sqrt(max(off_sq, 0.0)) <= tol * scale:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # two-sided rotation in the (p, q) plane; annihilates A[p, q]
                col_p, col_q = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p, row_q = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = 0.0
                A[q, p] = 0.0
                vec_p, vec_q = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vec_p - s * vec_q
                V[:, q] = s * vec_p + c * vec_q
    if not converged:
        raise EigenConvergenceError(
            f"Jacobi iteration did not converge within {max_sweeps} sweeps"
        )
    values = np.diag(A).copy()
    order = index[np.argsort(-values, kind="stable")]
    return values[order], V[:, order]
