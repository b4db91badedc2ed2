"""Sparse matrix helpers and a Jacobi-preconditioned conjugate gradient solver.

Matrices are ``scipy.sparse.csr_array`` instances with canonical format
(sorted, duplicate-free column indices in every row).
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

__all__ = [
    "ConvergenceError",
    "as_csr",
    "is_symmetric",
    "spmv",
    "solve_spd",
    "CG_TOL",
]

CG_TOL = 1e-12


class ConvergenceError(RuntimeError):
    """An iterative method stopped without meeting its tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


def as_csr(a):
    """Canonical CSR copy of a dense or sparse matrix."""
    A = sp.csr_array(a, dtype=float)
    A.sum_duplicates()
    A.sort_indices()
    return A


def is_symmetric(A, rtol=1e-14):
    A = sp.csr_array(A)
    if A.shape[0] != A.shape[1]:
        return False
    diff = abs(A - A.T)
    scale = abs(A).max() if A.nnz else 0.0
    return diff.nnz == 0 or diff.max() <= rtol * scale


def spmv(A, x):
    """Return ``A @ x``; rejects incompatible shapes."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or A.shape[1] != x.shape[0]:
        raise ValueError(f"dimension mismatch: matrix {A.shape} times vector {x.shape}")
    return A @ x


def solve_spd(A, b, tol=CG_TOL, max_iter=None, x0=None):
    """Solve ``A x = b`` for symmetric positive definite ``A`` by Jacobi-PCG.

    Stops once ``||b - A x|| <= tol * ||b||`` (recomputed from scratch on the
    returned iterate). Raises :class:`ConvergenceError` after ``max_iter``
    iterations, which defaults to ``10 * n``.
    """
    b = np.asarray(b, dtype=float)
    n = A.shape[0]
    if A.shape[1] != n:
        raise ValueError(f"matrix must be square, got {A.shape}")
    if b.shape != (n,):
        raise ValueError(f"right-hand side has length {b.shape}, expected {n}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter is None:
        max_iter = 10 * max(n, 1)

    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n)
    target = tol * bnorm

    diag = A.diagonal()
    if np.any(diag <= 0):
        raise ValueError("matrix has a non-positive diagonal entry; not SPD")
    inv_diag = 1.0 / diag

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = b - A @ x
    rnorm = np.linalg.norm(r)
    if rnorm <= target:
        return x
    z = inv_diag * r
    p = z.copy()
    rz = r @ z
    for it in range(1, max_iter + 1):
        Ap = A @ p
        pAp = p @ Ap
        if pAp <= 0:
            raise ConvergenceError("matrix is not positive definite (p'Ap <= 0)", rnorm / bnorm, it)
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        rnorm = np.linalg.norm(r)
        if rnorm <= target:
            # the recursive residual drifts; confirm on the true residual and restart if needed
            r = b - A @ x
            rnorm = np.linalg.norm(r)
            if rnorm <= target:
                return x
            z = inv_diag * r
            p = z.copy()
            rz = r @ z
            continue
        z = inv_diag * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise ConvergenceError(
        f"CG did not converge in {max_iter} iterations (relative residual {rnorm / bnorm:.3e})",
        rnorm / bnorm,
        max_iter,
    )
