"""
Residual-model problem type.

A Problem pairs a raw model ``x -> model output`` with observed data and an initial box.
``evaluate`` returns the model output on the residual scale (``log10`` or ``linear``) so that
``ssr(evaluate(x)) = ||evaluate(x) - target||^2``. Any failure of the model, non-finite value,
or non-positive value under the log scale is NOT-EVALUABLE and comes back as ``None``.
"""

import dataclasses
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from cgnsolve.core.constants import RESIDUAL_SCALE_LINEAR, RESIDUAL_SCALES
from cgnsolve.core.utils import ConfigError, ContractViolationError, logger

Model = Callable[[np.ndarray], Optional[np.ndarray]]

# arithmetic failures a model may raise that mean NOT-EVALUABLE
_MODEL_FAILURES = (FloatingPointError, OverflowError, ZeroDivisionError, ValueError)


def round_half_away(values: np.ndarray, decimals: int) -> np.ndarray:
    """Round to ``decimals`` places, halves away from zero (1.25 -> 1.3, -1.25 -> -1.3)."""
    scale = 10.0**decimals
    return np.sign(values) * np.floor(np.abs(values) * scale + 0.5) / scale


def to_residual_scale(values: np.ndarray, residual_scale: str) -> Optional[np.ndarray]:
    """Map raw model values onto the residual scale; ``None`` if not representable."""
    if residual_scale == RESIDUAL_SCALE_LINEAR:
        return values
    if np.any(values <= 0):
        return None
    return np.log10(values)


@dataclass(frozen=True, eq=False)
class Problem:
    """Nonlinear least squares problem ``min_x ||evaluate(x) - target||^2``.

    Attributes:
        problem_id: Registry id.
        model: Raw model, returns outputs in model units or ``None``.
        range_lo: Lower corner of the initial box.
        range_hi: Upper corner of the initial box.
        observed: Data in model units; ``None`` for an unfitted template.
        residual_scale: ``log10`` or ``linear``.
        param_names: One name per parameter.
        obs_times: Sample time of every observation.
        obs_groups: Dose level (or other group label) of every observation.
        truth_x: Parameters that generated the data, when known.
        starts: Pinned initial cluster (n x N), bypassing random sampling.
        decimals: Round the scaled outputs to this many decimals (discontinuous variant).
    """

    problem_id: str
    model: Model
    range_lo: np.ndarray
    range_hi: np.ndarray
    observed: Optional[np.ndarray] = None
    residual_scale: str = RESIDUAL_SCALE_LINEAR
    param_names: Tuple[str, ...] = ()
    obs_times: Optional[np.ndarray] = None
    obs_groups: Tuple[str, ...] = ()
    truth_x: Optional[np.ndarray] = None
    starts: Optional[np.ndarray] = None
    decimals: Optional[int] = None

    def __post_init__(self):
        lo = np.asarray(self.range_lo, dtype=np.float64).reshape(-1)
        hi = np.asarray(self.range_hi, dtype=np.float64).reshape(-1)
        if lo.shape != hi.shape:
            raise ContractViolationError(f"range_lo and range_hi differ in length: {lo.size} vs {hi.size}")
        if np.any(lo > hi):
            raise ContractViolationError("range_lo must be <= range_hi componentwise")
        if self.residual_scale not in RESIDUAL_SCALES:
            raise ConfigError(f"unknown residual scale {self.residual_scale!r}; expected one of {', '.join(RESIDUAL_SCALES)}")
        object.__setattr__(self, "range_lo", lo)
        object.__setattr__(self, "range_hi", hi)
        if self.observed is not None:
            object.__setattr__(self, "observed", np.asarray(self.observed, dtype=np.float64).reshape(-1))
        if self.truth_x is not None:
            object.__setattr__(self, "truth_x", np.asarray(self.truth_x, dtype=np.float64).reshape(-1))
        if self.starts is not None:
            starts = np.asarray(self.starts, dtype=np.float64)
            if starts.ndim != 2 or starts.shape[0] != lo.size:
                raise ContractViolationError(f"pinned starts must be {lo.size} x N, got {starts.shape}")
            object.__setattr__(self, "starts", starts)

    @property
    def dim_x(self) -> int:
        return self.range_lo.size

    @property
    def dim_y(self) -> int:
        if self.observed is None:
            raise ContractViolationError(f"problem {self.problem_id} has no observed data")
        return self.observed.size

    @property
    def target(self) -> np.ndarray:
        """Observed data on the residual scale (``y*``)."""
        if self.observed is None:
            raise ContractViolationError(f"problem {self.problem_id} has no observed data")
        scaled = to_residual_scale(self.observed, self.residual_scale)
        if scaled is None:
            raise ContractViolationError(f"observed data of {self.problem_id} must be positive under the log10 residual scale")
        return scaled

    def with_observed(self, observed: Sequence[float], truth_x: Optional[Sequence[float]] = None) -> "Problem":
        """Copy of this problem fitted against ``observed``."""
        truth = self.truth_x if truth_x is None else truth_x
        return dataclasses.replace(self, observed=np.asarray(observed, dtype=np.float64), truth_x=truth)

    def evaluate(self, x: Sequence[float]) -> Optional[np.ndarray]:
        """Model output on the residual scale, or ``None`` when NOT-EVALUABLE."""
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        if x.size != self.dim_x:
            raise ContractViolationError(f"{self.problem_id} expects {self.dim_x} parameters, got {x.size}")
        if not np.all(np.isfinite(x)):
            return None
        try:
            with np.errstate(all="ignore"):
                raw = self.model(x)
                if raw is None:
                    return None
                raw = np.asarray(raw, dtype=np.float64).reshape(-1)
                if not np.all(np.isfinite(raw)):
                    return None
                y = to_residual_scale(raw, self.residual_scale)
        except _MODEL_FAILURES as e:
            logger.debug("%s not evaluable at %s: %s", self.problem_id, x, e)
            return None
        if y is None or not np.all(np.isfinite(y)):
            return None
        if self.decimals is not None:
            y = round_half_away(y, self.decimals)
        return y

    def ssr(self, y: np.ndarray) -> float:
        """Sum of squared residuals of an evaluable output."""
        residual = np.asarray(y, dtype=np.float64) - self.target
        return float(residual @ residual)


def rounded(problem: Problem, decimals: int = 1) -> Problem:
    """Discontinuous variant of ``problem``: outputs rounded to ``decimals`` places.

    Rounding acts on the residual-scale output and keeps NOT-EVALUABLE as is.
    """
    problem_id = problem.problem_id if problem.problem_id.endswith("_rounded") else f"{problem.problem_id}_rounded"
    return dataclasses.replace(problem, problem_id=problem_id, decimals=decimals)
