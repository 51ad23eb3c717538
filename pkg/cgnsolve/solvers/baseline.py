"""
Multi-start Levenberg-Marquardt baseline with a forward-difference Jacobian.

Every model evaluation is counted (trial points and Jacobian columns alike) so the totals are
directly comparable to the Cluster Gauss-Newton evaluation count.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from cgnsolve.core.constants import (
    DEFAULT_LAMBDA_INIT,
    LAMBDA_DECREASE,
    LAMBDA_INCREASE,
    LM_EVALS_PER_DIM,
    LM_FD_STEP_DEFAULT,
    LM_LAMBDA_CAP,
    LM_SSR_TOL,
    LM_STEP_TOL,
)
from cgnsolve.core.linalg import regularized_solve
from cgnsolve.core.utils import ConfigError, ContractViolationError, JacobianFailureError, logger
from cgnsolve.problems.base import Problem
from cgnsolve.solvers.evaluation import EvaluationCounter, counted, ordered_map

STATUS_CONVERGED = "converged"
STATUS_EVAL_BUDGET = "eval-budget"
STATUS_STALLED = "stalled"
STATUS_FAILED = "failed"
LM_STATUSES = (STATUS_CONVERGED, STATUS_EVAL_BUDGET, STATUS_STALLED, STATUS_FAILED)


@dataclass(frozen=True)
class LmConfig:
    lambda_init: float = DEFAULT_LAMBDA_INIT
    fd_step: float = LM_FD_STEP_DEFAULT
    max_evals: Optional[int] = None
    step_tol: float = LM_STEP_TOL
    ssr_tol: float = LM_SSR_TOL
    lambda_cap: float = LM_LAMBDA_CAP

    def eval_budget(self, dim_x: int) -> int:
        return self.max_evals if self.max_evals is not None else LM_EVALS_PER_DIM * dim_x

    def validate(self, dim_x: Optional[int] = None) -> "LmConfig":
        if not self.fd_step > 0:
            raise ConfigError(f"fd_step must be > 0, got {self.fd_step}")
        if not self.lambda_init > 0:
            raise ConfigError(f"lambda_init must be > 0, got {self.lambda_init}")
        if self.step_tol < 0 or self.ssr_tol < 0:
            raise ConfigError("step_tol and ssr_tol must be >= 0")
        if dim_x is not None and self.eval_budget(dim_x) < dim_x + 1:
            raise ConfigError(f"max_evals must be >= n+1 = {dim_x + 1}, got {self.max_evals}")
        return self


@dataclass(frozen=True)
class LmStep:
    ssr: float
    lam: float
    accepted: bool
    evaluations: int


@dataclass(frozen=True, eq=False)
class StartResult:
    start_index: int
    x_final: np.ndarray
    ssr_final: float
    evals_used: int
    status: str
    lambda_final: float = DEFAULT_LAMBDA_INIT
    history: Tuple[LmStep, ...] = field(default=())


def fd_jacobian(
    problem: Problem, x: Sequence[float], fd_step: float, y0: Optional[np.ndarray] = None, counter: Optional[EvaluationCounter] = None
) -> np.ndarray:
    """Forward-difference Jacobian ``m x n``.

    Column ``j`` uses the step ``fd_step * max(|x_j|, 1)``. With ``y0`` given the call costs
    exactly n evaluations, otherwise one more for the base point.

    Raises:
        ContractViolationError: If ``x`` itself is not evaluable.
        JacobianFailureError: If a perturbed point is not evaluable.
    """
    evaluate = problem.evaluate if counter is None else counted(problem.evaluate, counter)
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if y0 is None:
        y0 = evaluate(x)
        if y0 is None:
            raise ContractViolationError("fd_jacobian requires an evaluable base point")
    J = np.empty((y0.size, x.size))
    for j in range(x.size):
        eps = fd_step * max(abs(x[j]), 1.0)
        shifted = x.copy()
        shifted[j] += eps
        y = evaluate(shifted)
        if y is None:
            raise JacobianFailureError(j)
        J[:, j] = (y - y0) / eps
    return J


def lm_single(problem: Problem, x0: Sequence[float], config: LmConfig, start_index: int = 0) -> StartResult:
    """Levenberg-Marquardt from one start.

    The Jacobian is rebuilt after every accepted step and reused while steps are rejected.
    Stops on a relative step below ``step_tol``, a relative SSR decrease below ``ssr_tol``,
    zero SSR, damping above ``lambda_cap`` or an exhausted evaluation budget.
    """
    config.validate(problem.dim_x)
    counter = EvaluationCounter()
    evaluate = counted(problem.evaluate, counter)
    budget = config.eval_budget(problem.dim_x)
    target = problem.target
    n = problem.dim_x

    x = np.asarray(x0, dtype=np.float64).reshape(-1).copy()
    lam = config.lambda_init
    y = evaluate(x)
    if y is None:
        return StartResult(start_index, x, float("inf"), counter.count, STATUS_FAILED, lam)
    r = problem.ssr(y)
    history: List[LmStep] = [LmStep(r, lam, True, counter.count)]
    J: Optional[np.ndarray] = None
    status = None

    while status is None:
        if r == 0.0:
            status = STATUS_CONVERGED
            break
        if J is None:
            if counter.count + n > budget:
                status = STATUS_EVAL_BUDGET
                break
            try:
                J = fd_jacobian(problem, x, config.fd_step, y0=y, counter=counter)
            except JacobianFailureError as e:
                logger.debug("Start %d: %s", start_index, e)
                status = STATUS_FAILED
                break
        if counter.count + 1 > budget:
            status = STATUS_EVAL_BUDGET
            break
        delta = regularized_solve(J, target - y, lam)
        if np.linalg.norm(delta) < config.step_tol * (1.0 + np.linalg.norm(x)):
            status = STATUS_CONVERGED
            break
        x_try = x + delta
        y_try = evaluate(x_try)
        r_try = problem.ssr(y_try) if y_try is not None and y_try.shape == y.shape else float("inf")
        if r_try < r:
            small_gain = (r - r_try) < config.ssr_tol * r
            x, y, r = x_try, y_try, r_try
            lam *= LAMBDA_DECREASE
            J = None
            history.append(LmStep(r, lam, True, counter.count))
            if small_gain:
                status = STATUS_CONVERGED
        else:
            lam *= LAMBDA_INCREASE
            history.append(LmStep(r, lam, False, counter.count))
            if lam > config.lambda_cap:
                status = STATUS_STALLED

    return StartResult(start_index, x, r, counter.count, status, lam, tuple(history))


def lm_multistart(problem: Problem, starts: np.ndarray, config: LmConfig, workers: int = 1) -> List[StartResult]:
    """Independent ``lm_single`` runs from every column of ``starts``, in column order."""
    starts = np.asarray(starts, dtype=np.float64)
    if starts.size == 0:
        return []
    if starts.ndim != 2 or starts.shape[0] != problem.dim_x:
        raise ContractViolationError(f"starts must be {problem.dim_x} x N, got {starts.shape}")
    config.validate(problem.dim_x)
    results = ordered_map(lambda j: lm_single(problem, starts[:, j], config, start_index=j), range(starts.shape[1]), workers)
    logger.debug("LM multistart: %d starts, %d evaluations", len(results), total_evaluations(results))
    return results


def total_evaluations(results: Sequence[StartResult]) -> int:
    return sum(result.evals_used for result in results)
