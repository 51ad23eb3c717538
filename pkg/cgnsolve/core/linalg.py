"""Dense linear algebra for the Cluster Gauss-Newton step.

The pseudoinverse goes through the SVD because rank-deficient difference matrices are an
expected regime (a cluster collapsed onto a hyperplane ``x_l = c``). All arithmetic is float64.

Functions:
    svd: thin singular value decomposition returning ``V`` (not ``V^T``)
    pinv: Moore-Penrose inverse with relative singular-value truncation
    weighted_minnorm_ls: minimum-norm slope of a weighted Frobenius least squares fit
    regularized_solve: Tikhonov-damped Gauss-Newton step
"""

from typing import Optional, Sequence, Tuple, Union

import numpy as np

from cgnsolve.core.utils import ContractViolationError, NumericalFailureError

ArrayLike = Union[np.ndarray, Sequence[float], Sequence[Sequence[float]]]


def _as_matrix(M: ArrayLike, name: str) -> np.ndarray:
    arr = np.asarray(M, dtype=np.float64)
    if arr.ndim != 2:
        raise ContractViolationError(f"{name} must be a 2-D matrix, got shape {arr.shape}")
    return arr


def default_rank_tol(shape: Tuple[int, int]) -> float:
    """Relative truncation level max(m, n) * machine epsilon."""
    return float(max(shape) * np.finfo(np.float64).eps)


def svd(M: ArrayLike) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin singular value decomposition ``M = U @ diag(s) @ V.T``.

    Args:
        M: Finite matrix of shape (m, n).

    Returns:
        Tuple of (U, s, V) with U (m, k), s non-increasing of length k = min(m, n), V (n, k).

    Raises:
        ContractViolationError: If M is not a finite 2-D matrix.
        NumericalFailureError: If the LAPACK driver does not converge.
    """
    arr = _as_matrix(M, "M")
    if not np.all(np.isfinite(arr)):
        raise ContractViolationError("svd requires a finite matrix")
    try:
        U, s, Vh = np.linalg.svd(arr, full_matrices=False)
    except np.linalg.LinAlgError as e:
        raise NumericalFailureError(f"SVD did not converge for a {arr.shape[0]}x{arr.shape[1]} matrix") from e
    return U, s, Vh.T


def pinv(M: ArrayLike, rank_tol: Optional[float] = None) -> np.ndarray:
    """Moore-Penrose inverse of ``M``.

    Singular values below ``rank_tol * max(s)`` are treated as zero.

    Args:
        M: Finite matrix of shape (m, n).
        rank_tol: Relative truncation level (>= 0). Defaults to max(m, n) * eps.

    Returns:
        np.ndarray: The (n, m) pseudoinverse.
    """
    arr = _as_matrix(M, "M")
    if rank_tol is None:
        rank_tol = default_rank_tol(arr.shape)
    if rank_tol < 0:
        raise ContractViolationError(f"rank_tol must be >= 0, got {rank_tol}")
    m, n = arr.shape
    if arr.size == 0:
        return np.zeros((n, m))
    U, s, V = svd(arr)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((n, m))
    keep = s > rank_tol * s[0]
    s_inv = np.zeros_like(s)
    s_inv[keep] = 1.0 / s[keep]
    return (V * s_inv) @ U.T


def weighted_minnorm_ls(DX: ArrayLike, DY: ArrayLike, D: ArrayLike, rank_tol: Optional[float] = None) -> np.ndarray:
    """Minimum-norm solution of ``min_A || D (DX^T A^T - DY^T) ||_F``.

    Args:
        DX: Parameter differences, shape (n, N).
        DY: Output differences, shape (m, N).
        D: Non-negative weights, length N.
        rank_tol: Relative truncation level forwarded to :func:`pinv`.

    Returns:
        np.ndarray: Slope matrix A of shape (m, n), ``A = DY D (DX D)^+``.

    Raises:
        ContractViolationError: On mismatched dimensions or negative weights.
    """
    dx = _as_matrix(DX, "DX")
    dy = _as_matrix(DY, "DY")
    d = np.asarray(D, dtype=np.float64).reshape(-1)
    if dx.shape[1] != dy.shape[1] or dx.shape[1] != d.size:
        raise ContractViolationError(f"weighted_minnorm_ls shape mismatch: DX {dx.shape}, DY {dy.shape}, D ({d.size},)")
    if np.any(d < 0):
        raise ContractViolationError("weights must be non-negative")
    return (dy * d) @ pinv(dx * d, rank_tol)


def regularized_solve(A: ArrayLike, residual: ArrayLike, lam: float) -> np.ndarray:
    """Tikhonov-regularised least squares step ``(A^T A + lam I)^-1 A^T residual``.

    Args:
        A: Slope matrix of shape (m, n).
        residual: Vector of length m.
        lam: Damping, strictly positive.

    Returns:
        np.ndarray: Step of length n.

    Raises:
        ContractViolationError: If lam <= 0 or the shapes disagree.
    """
    if not lam > 0:
        raise ContractViolationError(f"regularisation parameter must be > 0, got {lam}")
    a = _as_matrix(A, "A")
    r = np.asarray(residual, dtype=np.float64).reshape(-1)
    if a.shape[0] != r.size:
        raise ContractViolationError(f"residual length {r.size} does not match A with {a.shape[0]} rows")
    if a.size == 0:
        return np.zeros(a.shape[1])
    # filter factors s / (s^2 + lam) stay finite for rank-deficient A and tiny lam
    U, s, V = svd(a)
    return V @ ((s / (s * s + lam)) * (U.T @ r))
