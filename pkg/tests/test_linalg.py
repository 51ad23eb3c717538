"""
Tests for cgnsolve.core.linalg.

Oracles are implemented here independently of numpy's SVD: a one-sided Jacobi SVD, the
explicit rank-1 pseudoinverse and the weighted normal equations.
"""

import math

import numpy as np
import pytest

from cgnsolve.core.linalg import default_rank_tol, pinv, regularized_solve, svd, weighted_minnorm_ls
from cgnsolve.core.utils import ContractViolationError


def jacobi_singular_values(M: np.ndarray, sweeps: int = 60) -> np.ndarray:
    """One-sided (Hestenes) Jacobi: orthogonalise columns, singular values are their norms."""
    U = np.array(M, dtype=np.float64)
    if U.shape[0] < U.shape[1]:
        U = U.T.copy()
    n = U.shape[1]
    for _ in range(sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = U[:, p] @ U[:, p]
                beta = U[:, q] @ U[:, q]
                gamma = U[:, p] @ U[:, q]
                if abs(gamma) <= 1e-15 * math.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                up, uq = U[:, p].copy(), U[:, q].copy()
                U[:, p] = c * up - s * uq
                U[:, q] = s * up + c * uq
        if not rotated:
            break
    return np.sort(np.linalg.norm(U, axis=0))[::-1]


def normal_equation_slope(DX: np.ndarray, DY: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Full-rank weighted LS slope ``DY D^2 DX^T (DX D^2 DX^T)^-1``."""
    w = d * d
    return np.linalg.solve((DX * w) @ DX.T, ((DY * w) @ DX.T).T).T


@pytest.mark.unit
class TestSvd:
    """Tests for svd."""

    def test_identity(self):
        """Identity has unit singular values."""
        _, s, _ = svd(np.eye(3))
        assert np.allclose(s, [1.0, 1.0, 1.0])

    def test_diagonal_with_zero(self):
        """diag(3, 0) has singular values (3, 0)."""
        _, s, _ = svd(np.diag([3.0, 0.0]))
        assert np.allclose(s, [3.0, 0.0])

    def test_random_matches_jacobi_oracle(self, rng):
        """Reconstruction, orthonormality and singular values against the Jacobi oracle."""
        M = rng.standard_normal((5, 3))
        U, s, V = svd(M)
        assert U.shape == (5, 3) and V.shape == (3, 3)
        assert np.linalg.norm(U @ np.diag(s) @ V.T - M) <= 1e-10 * np.linalg.norm(M)
        assert np.allclose(U.T @ U, np.eye(3), atol=1e-12)
        assert np.allclose(V.T @ V, np.eye(3), atol=1e-12)
        assert np.all(np.diff(s) <= 0) and np.all(s >= 0)
        assert np.allclose(s, jacobi_singular_values(M), rtol=1e-10)

    def test_wide_matrix_matches_jacobi_oracle(self, rng):
        """Wide matrices work as well."""
        M = rng.standard_normal((2, 6))
        _, s, _ = svd(M)
        assert np.allclose(s, jacobi_singular_values(M), rtol=1e-10)

    def test_non_finite_rejected(self):
        """A NaN entry violates the precondition."""
        with pytest.raises(ContractViolationError):
            svd(np.array([[1.0, np.nan], [0.0, 1.0]]))

    def test_vector_rejected(self):
        """Only 2-D input is a matrix."""
        with pytest.raises(ContractViolationError):
            svd(np.ones(3))


@pytest.mark.unit
class TestPinv:
    """Tests for pinv."""

    def test_invertible_is_inverse(self):
        """Full-rank 2x2 gives the ordinary inverse."""
        M = np.array([[4.0, 7.0], [2.0, 6.0]])
        assert np.allclose(pinv(M), np.linalg.inv(M), atol=1e-12)

    def test_zero_matrix(self):
        """Zero matrix maps to the transposed zero matrix."""
        assert np.array_equal(pinv(np.zeros((2, 3))), np.zeros((3, 2)))

    def test_rank_one_formula(self, rng):
        """``(u v^T)^+ = v u^T / (|u|^2 |v|^2)``."""
        u = rng.standard_normal(3)
        v = rng.standard_normal(3)
        expected = np.outer(v, u) / ((u @ u) * (v @ v))
        assert np.allclose(pinv(np.outer(u, v)), expected, atol=1e-12)

    @pytest.mark.parametrize("shape", [(3, 3), (7, 4), (4, 9), (30, 30), (12, 30)])
    def test_moore_penrose_identities(self, rng, shape):
        """All four Moore-Penrose identities within 1e-8."""
        M = rng.standard_normal(shape)
        P = pinv(M)
        assert np.allclose(M @ P @ M, M, atol=1e-8)
        assert np.allclose(P @ M @ P, P, atol=1e-8)
        assert np.allclose((M @ P).T, M @ P, atol=1e-8)
        assert np.allclose((P @ M).T, P @ M, atol=1e-8)

    def test_truncation(self):
        """Singular values below rank_tol * s_max are dropped."""
        M = np.diag([1.0, 1e-9])
        assert np.allclose(pinv(M, rank_tol=1e-6), np.diag([1.0, 0.0]))
        assert np.allclose(pinv(M, rank_tol=0.0), np.diag([1.0, 1e9]))

    def test_negative_tolerance_rejected(self):
        """rank_tol must be non-negative."""
        with pytest.raises(ContractViolationError):
            pinv(np.eye(2), rank_tol=-1.0)

    def test_default_rank_tol(self):
        """Default truncation is max(m, n) * eps."""
        assert default_rank_tol((3, 7)) == 7 * np.finfo(np.float64).eps


@pytest.mark.unit
class TestWeightedMinnormLs:
    """Tests for weighted_minnorm_ls."""

    def test_affine_recovery(self, rng):
        """Exactly affine data gives the true slope for any positive weights."""
        B = rng.standard_normal((3, 2))
        DX = rng.standard_normal((2, 6))
        d = rng.uniform(0.1, 5.0, 6)
        assert np.allclose(weighted_minnorm_ls(DX, B @ DX, d), B, atol=1e-8)

    def test_hyperplane_gives_zero_column(self, rng):
        """An all-zero row of DX gives a zero column of A (minimum norm)."""
        DX = rng.standard_normal((3, 6))
        DX[1] = 0.0
        DY = rng.standard_normal((2, 6))
        A = weighted_minnorm_ls(DX, DY, np.ones(6))
        assert np.all(np.abs(A[:, 1]) <= 1e-12)

    def test_random_instances_match_normal_equations(self, rng):
        """1000 random small instances agree with the normal-equation oracle."""
        checked = 0
        for _ in range(1000):
            n = int(rng.integers(1, 5))
            m = int(rng.integers(1, 5))
            N = int(rng.integers(n + 2, 9))
            DX = rng.standard_normal((n, N))
            DY = rng.standard_normal((m, N))
            d = rng.uniform(0.1, 2.0, N)
            if np.linalg.cond(DX * d) > 1e4:
                continue
            expected = normal_equation_slope(DX, DY, d)
            assert np.allclose(weighted_minnorm_ls(DX, DY, d), expected, rtol=1e-8, atol=1e-8)
            checked += 1
        assert checked > 900

    def test_weight_scaling_invariance(self, rng):
        """Uniform rescaling of the weights leaves A unchanged."""
        DX = rng.standard_normal((2, 7))
        DY = rng.standard_normal((3, 7))
        d = rng.uniform(0.5, 1.5, 7)
        assert np.allclose(weighted_minnorm_ls(DX, DY, d), weighted_minnorm_ls(DX, DY, 37.0 * d), atol=1e-8)

    def test_zero_weight_ignores_column(self, rng):
        """A zero-weight column does not influence the fit."""
        B = rng.standard_normal((2, 2))
        DX = rng.standard_normal((2, 5))
        DY = B @ DX
        DY[:, 0] += 100.0
        d = np.array([0.0, 1.0, 1.0, 1.0, 1.0])
        assert np.allclose(weighted_minnorm_ls(DX, DY, d), B, atol=1e-8)

    def test_shape_mismatch(self):
        """Mismatched column counts violate the contract."""
        with pytest.raises(ContractViolationError):
            weighted_minnorm_ls(np.ones((2, 4)), np.ones((1, 5)), np.ones(4))

    def test_negative_weight(self):
        """Weights must be non-negative."""
        with pytest.raises(ContractViolationError):
            weighted_minnorm_ls(np.ones((1, 2)), np.ones((1, 2)), [1.0, -1.0])


@pytest.mark.unit
class TestRegularizedSolve:
    """Tests for regularized_solve."""

    def test_zero_residual(self, rng):
        """Zero residual gives a zero step."""
        A = rng.standard_normal((4, 3))
        assert np.array_equal(regularized_solve(A, np.zeros(4), 0.1), np.zeros(3))

    def test_scalar_example(self):
        """A = 2, residual 1, lambda 0.01 gives 2 / 4.01."""
        assert regularized_solve([[2.0]], [1.0], 0.01)[0] == pytest.approx(2.0 / 4.01, rel=1e-14)

    def test_normal_equation(self, rng):
        """``(A^T A + lam I) delta = A^T r`` within relative 1e-8."""
        A = rng.standard_normal((6, 4))
        r = rng.standard_normal(6)
        delta = regularized_solve(A, r, 0.3)
        lhs = (A.T @ A + 0.3 * np.eye(4)) @ delta
        assert np.allclose(lhs, A.T @ r, rtol=1e-8, atol=1e-12)

    def test_large_lambda_bound(self, rng):
        """``||delta|| <= ||A^T r|| / lambda``."""
        A = rng.standard_normal((3, 3))
        r = rng.standard_normal(3)
        delta = regularized_solve(A, r, 1e12)
        assert np.linalg.norm(delta) <= np.linalg.norm(A.T @ r) / 1e12

    def test_monotone_damping(self, rng):
        """Larger damping never gives a longer step."""
        A = rng.standard_normal((5, 3))
        r = rng.standard_normal(5)
        norms = [np.linalg.norm(regularized_solve(A, r, lam)) for lam in (1e-6, 1e-3, 1.0, 1e3)]
        assert all(a >= b for a, b in zip(norms, norms[1:]))

    def test_rank_deficient_tiny_lambda_is_finite(self):
        """Rank-deficient A with tiny damping still yields a finite step."""
        A = np.array([[1.0, 0.0], [1.0, 0.0]])
        delta = regularized_solve(A, [1.0, 1.0], 1e-300)
        assert np.all(np.isfinite(delta))
        assert abs(delta[1]) <= 1e-12

    @pytest.mark.parametrize("lam", [0.0, -1.0])
    def test_non_positive_lambda(self, lam):
        """lambda <= 0 violates the contract."""
        with pytest.raises(ContractViolationError):
            regularized_solve(np.eye(2), np.ones(2), lam)

    def test_residual_length_mismatch(self):
        """Residual length must match the rows of A."""
        with pytest.raises(ContractViolationError):
            regularized_solve(np.eye(2), np.ones(3), 1.0)
