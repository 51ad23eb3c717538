"""One-dimensional piecewise test function with a flat global minimum on [-1, 1]."""

import math

import numpy as np

from cgnsolve.core.constants import RESIDUAL_SCALE_LINEAR
from cgnsolve.problems.base import Problem

TOY_ID = "toy1d"
TOY_TARGET = 3.0
TOY_RANGE = (-8.0, 8.0)
TOY_STARTS = (-6.3797853, -4.1656025, -3.6145728, 2.0755468, 4.1540421)


def eval_toy(x: float) -> float:
    """``(x+1)^2 - 2cos(10(x+1)) + 5`` left of -1, ``3`` on [-1, 1], mirrored right of 1."""
    if x < -1.0:
        return (x + 1.0) ** 2 - 2.0 * math.cos(10.0 * (x + 1.0)) + 5.0
    if x > 1.0:
        return (x - 1.0) ** 2 - 2.0 * math.cos(10.0 * (x - 1.0)) + 5.0
    return 3.0


def toy_model(x: np.ndarray) -> np.ndarray:
    return np.array([eval_toy(float(x[0]))])


def toy_problem(residual_scale: str = RESIDUAL_SCALE_LINEAR) -> Problem:
    """The toy problem with ``y* = 3`` and its five pinned starting points."""
    return Problem(
        problem_id=TOY_ID,
        model=toy_model,
        range_lo=np.array([TOY_RANGE[0]]),
        range_hi=np.array([TOY_RANGE[1]]),
        observed=np.array([TOY_TARGET]),
        residual_scale=residual_scale,
        param_names=("x",),
        obs_times=np.array([0.0]),
        obs_groups=("none",),
        truth_x=np.array([0.0]),
        starts=np.array([TOY_STARTS]),
    )
