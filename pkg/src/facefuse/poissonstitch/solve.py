"""Screened Poisson solves on the mesh Laplacian.

Minimizes ||A x - y||^2 + lambda ||x - x'||^2 through the SPD normal
equations (A^T A + lambda W) x = A^T y + lambda W x', where W is an
optional diagonal weight (all ones by default; zeros drop vertices from
the screening term).
"""

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from ..errors import NumericalError
from ..meshkit import SparseLinearSystem

RESIDUAL_LIMIT = 1e-8


@dataclass
class SolveResult:
    x: np.ndarray
    residual: float


def _as_csr(matrix):
    if isinstance(matrix, SparseLinearSystem):
        return matrix.to_csr()
    return sparse.csr_matrix(matrix)


def solve_screened_poisson(laplace, y, lam, x_prime, weights=None):
    """Solve the screened least-squares system; raises on bad residuals.

    ``y`` and ``x_prime`` are (N,) or (N, C); channels solve against one
    factorization.  The relative residual of the normal equations must
    reach 1e-8 or NumericalError is raised.
    """
    if lam <= 0:
        raise NumericalError("screening weight lambda must be positive")
    a = _as_csr(laplace)
    n = a.shape[0]
    y = np.asarray(y, dtype=np.float64)
    xp = np.asarray(x_prime, dtype=np.float64)
    if weights is None:
        w = np.ones(n)
    else:
        w = np.asarray(weights, dtype=np.float64)
    lhs = (a.T @ a + sparse.diags(lam * w)).tocsc()
    rhs = a.T @ y + lam * (w[:, None] * xp.reshape(n, -1)).reshape(y.shape) \
        if y.ndim > 1 else a.T @ y + lam * w * xp
    try:
        lu = splu(lhs)
    except RuntimeError as exc:
        raise NumericalError(f"screened Poisson factorization failed: {exc}") from None
    if y.ndim == 1:
        x = lu.solve(rhs)
        x += lu.solve(rhs - lhs @ x)  # one step of iterative refinement
    else:
        x = np.column_stack([lu.solve(rhs[:, c]) for c in range(rhs.shape[1])])
        x += np.column_stack([lu.solve((rhs - lhs @ x)[:, c]) for c in range(rhs.shape[1])])
    res = relative_residual(lhs, x, rhs)
    if res > RESIDUAL_LIMIT:
        raise NumericalError(
            f"screened Poisson solve did not converge: relative residual {res:.3e}"
        )
    return SolveResult(x, float(res))


def relative_residual(lhs, x, rhs):
    """Backward-error style residual ||Ax-b|| / (||A||*||x|| + ||b||)."""
    norm_a = np.abs(lhs).sum(axis=1).max()  # infinity norm
    denom = norm_a * np.linalg.norm(x) + np.linalg.norm(rhs)
    return float(np.linalg.norm(lhs @ x - rhs) / max(denom, 1e-300))
