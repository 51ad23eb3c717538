"""
Pytest configuration and shared fixtures for cgn-solve tests.

Provides seeded generators, small analytic problems (affine and quadratic) and temporary
artifact directories.
"""

from pathlib import Path
from typing import Generator

import numpy as np
import pytest

from cgnsolve.core.constants import RESIDUAL_SCALE_LINEAR
from cgnsolve.problems.base import Problem

# Affine test problem y = B x + c with a consistent target at AFFINE_SOLUTION
AFFINE_B = np.array([[2.0, -1.0], [0.5, 1.5], [1.0, 1.0]])
AFFINE_C = np.array([1.0, -2.0, 0.5])
AFFINE_SOLUTION = np.array([0.3, -0.7])


@pytest.fixture
def rng() -> np.random.Generator:
    """Generator with a fixed seed, fresh per test."""
    return np.random.default_rng(20240601)


@pytest.fixture
def affine_problem() -> Problem:
    """Consistent affine least squares problem on the box [-2, 2]^2 (m = 3, n = 2)."""
    return Problem(
        problem_id="affine",
        model=lambda x: AFFINE_B @ x + AFFINE_C,
        range_lo=np.array([-2.0, -2.0]),
        range_hi=np.array([2.0, 2.0]),
        observed=AFFINE_B @ AFFINE_SOLUTION + AFFINE_C,
        residual_scale=RESIDUAL_SCALE_LINEAR,
        param_names=("a", "b"),
    )


@pytest.fixture
def quadratic_problem() -> Problem:
    """Scalar ``f(x) = x^2`` with target 0."""
    return Problem(
        problem_id="quadratic",
        model=lambda x: np.array([x[0] ** 2]),
        range_lo=np.array([-2.0]),
        range_hi=np.array([2.0]),
        observed=np.array([0.0]),
        residual_scale=RESIDUAL_SCALE_LINEAR,
    )


@pytest.fixture
def output_dir(tmp_path: Path) -> Generator[Path, None, None]:
    """Artifact directory path inside the pytest temp dir; not created."""
    out = tmp_path / "results"
    yield out
