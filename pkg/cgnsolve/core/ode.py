"""
Stiff initial value problem integrator with bolus dose events.

The stepper is the three-stage, L-stable Rosenbrock method ROS3 (order 3, embedded order 2
error estimate). Every step solves three linear systems with one LU factorisation of
``I / (h * gamma) - J``. Integration runs from ``t = 0`` and lands exactly on every sample and
event time; doses are applied at their event time before the sample at that time is taken.

Work is bounded: more than ``max_steps`` attempted steps, a step size below the floor or a
non-finite state all yield NOT-EVALUABLE (``None``) instead of an exception.
"""

import math
from dataclasses import dataclass
from typing import Any, Callable, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from cgnsolve.core.constants import (
    ODE_ABS_TOL,
    ODE_MAX_STEP_FACTOR,
    ODE_MAX_STEPS,
    ODE_MIN_STEP_FACTOR,
    ODE_REJECT_FACTOR,
    ODE_REL_TOL,
    ODE_SAFETY,
    ODE_STEP_FLOOR,
)
from cgnsolve.core.utils import ConfigError, ContractViolationError, logger

DOSE_SET = "set"
DOSE_ADD = "add"
DOSE_MODES = (DOSE_SET, DOSE_ADD)

STATUS_OK = "ok"
STATUS_STEP_BUDGET = "step-budget"
STATUS_STEP_FLOOR = "step-floor"
STATUS_NON_FINITE = "non-finite"

Rhs = Callable[[float, np.ndarray, Any], np.ndarray]

# ROS3 coefficients; A and C are strictly lower triangular, stored row-wise (21, 31, 32)
_ROS3_A = (1.0, 1.0, 0.0)
_ROS3_C = (-1.0156171083877702091975600115545, 4.0759956452537699824805835358067, 9.2076794298330791242156818474003)
_ROS3_M = (1.0, 6.1697947043828245592553615689730, -0.42772256543218573326238373806514)
_ROS3_E = (0.5, -2.9079558716805469821718236208017, 0.22354069897811569627360909276199)
_ROS3_ALPHA = (0.0, 0.43586652150845899941601945119356, 0.43586652150845899941601945119356)
_ROS3_GAMMA = (0.43586652150845899941601945119356, 0.24291996454816804366592249683314, 2.1851380027664058511513169485832)
_ROS3_ELO = 3.0

_SQRT_EPS = math.sqrt(np.finfo(np.float64).eps)


@dataclass(frozen=True)
class OdeSystem:
    """Right-hand side ``du/dt = rhs(t, u, params)`` with an optional analytic Jacobian."""

    dim: int
    rhs: Rhs
    jac: Optional[Rhs] = None
    autonomous: bool = True


@dataclass(frozen=True)
class DoseEvent:
    """Bolus applied to one compartment at a fixed time."""

    time: float
    state_index: int
    amount: float
    mode: str = DOSE_ADD


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = ODE_REL_TOL
    abs_tol: float = ODE_ABS_TOL
    max_steps: int = ODE_MAX_STEPS
    initial_step: Optional[float] = None

    def validate(self) -> "IntegratorConfig":
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ConfigError(f"ODE tolerances must be > 0, got rel_tol={self.rel_tol}, abs_tol={self.abs_tol}")
        if self.max_steps < 1:
            raise ConfigError(f"max_steps must be >= 1, got {self.max_steps}")
        if self.initial_step is not None and not self.initial_step > 0:
            raise ConfigError(f"initial_step must be > 0, got {self.initial_step}")
        return self


@dataclass
class IntegrationDiagnostics:
    """Step-size and work telemetry of one integration."""

    accepted: int = 0
    rejected: int = 0
    min_step: float = math.inf
    jacobian_evaluations: int = 0
    lu_factorizations: int = 0
    rhs_evaluations: int = 0
    status: str = STATUS_OK

    @property
    def attempted(self) -> int:
        return self.accepted + self.rejected


@dataclass
class _StepControl:
    h: float
    reject_last: bool = False
    reject_more: bool = False


class _Failure(Exception):
    """Internal early exit carrying an integration status."""

    def __init__(self, status: str):
        super().__init__(status)
        self.status = status


def _check_inputs(system: OdeSystem, u0: np.ndarray, events: Sequence[DoseEvent], sample_times: np.ndarray) -> None:
    if u0.shape != (system.dim,):
        raise ContractViolationError(f"u0 has shape {u0.shape}, expected ({system.dim},)")
    if sample_times.size and (sample_times[0] < 0 or np.any(np.diff(sample_times) <= 0)):
        raise ContractViolationError("sample_times must be non-negative and strictly increasing")
    previous = -math.inf
    for event in events:
        if event.time < 0:
            raise ContractViolationError(f"dose time must be >= 0, got {event.time}")
        if event.time < previous:
            raise ContractViolationError("dose events must be sorted by time")
        if event.mode not in DOSE_MODES:
            raise ContractViolationError(f"unknown dose mode {event.mode!r}")
        if not 0 <= event.state_index < system.dim:
            raise ContractViolationError(f"dose state_index {event.state_index} outside 0..{system.dim - 1}")
        previous = event.time


def _apply_events(u: np.ndarray, events: Sequence[DoseEvent], t: float) -> None:
    for event in events:
        if event.time == t:
            if event.mode == DOSE_SET:
                u[event.state_index] = event.amount
            else:
                u[event.state_index] += event.amount


def _rhs(system: OdeSystem, t: float, u: np.ndarray, params: Any, diag: IntegrationDiagnostics) -> np.ndarray:
    diag.rhs_evaluations += 1
    du = np.asarray(system.rhs(t, u, params), dtype=np.float64)
    if not np.all(np.isfinite(du)):
        raise _Failure(STATUS_NON_FINITE)
    return du


def _jacobian(system: OdeSystem, t: float, u: np.ndarray, f0: np.ndarray, params: Any, diag: IntegrationDiagnostics) -> np.ndarray:
    diag.jacobian_evaluations += 1
    if system.jac is not None:
        J = np.asarray(system.jac(t, u, params), dtype=np.float64)
    else:
        J = np.empty((system.dim, system.dim))
        for j in range(system.dim):
            delta = _SQRT_EPS * max(abs(u[j]), 1.0)
            shifted = u.copy()
            shifted[j] += delta
            J[:, j] = (_rhs(system, t, shifted, params, diag) - f0) / delta
    if not np.all(np.isfinite(J)):
        raise _Failure(STATUS_NON_FINITE)
    return J


def _error_norm(u: np.ndarray, unew: np.ndarray, err: np.ndarray, config: IntegratorConfig) -> float:
    scale = config.abs_tol + config.rel_tol * np.maximum(np.abs(u), np.abs(unew))
    return max(float(np.sqrt(np.mean((err / scale) ** 2))), 1e-10)


def _initial_step(u: np.ndarray, f0: np.ndarray, config: IntegratorConfig) -> float:
    if config.initial_step is not None:
        return config.initial_step
    scale = config.abs_tol + config.rel_tol * np.abs(u)
    d0 = float(np.sqrt(np.mean((u / scale) ** 2)))
    d1 = float(np.sqrt(np.mean((f0 / scale) ** 2)))
    if d0 < 1e-5 or d1 < 1e-5:
        return 1e-6
    return 0.01 * d0 / d1


def _ros3_attempt(
    system: OdeSystem, t: float, u: np.ndarray, h: float, f0: np.ndarray, J: np.ndarray, dfdt: Optional[np.ndarray], params: Any, diag: IntegrationDiagnostics
) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """One ROS3 step; ``None`` when the stage solves go non-finite."""
    G = np.eye(system.dim) / (h * _ROS3_GAMMA[0]) - J
    diag.lu_factorizations += 1
    try:
        lu_piv = scipy.linalg.lu_factor(G, check_finite=True)
    except (ValueError, np.linalg.LinAlgError):
        return None

    def stage_rhs(base: np.ndarray, stage: int) -> np.ndarray:
        return base if dfdt is None else base + h * _ROS3_GAMMA[stage] * dfdt

    K1 = scipy.linalg.lu_solve(lu_piv, stage_rhs(f0, 0))
    y2 = u + _ROS3_A[0] * K1
    diag.rhs_evaluations += 1
    f1 = np.asarray(system.rhs(t + _ROS3_ALPHA[1] * h, y2, params), dtype=np.float64)
    if not np.all(np.isfinite(f1)):
        return None
    K2 = scipy.linalg.lu_solve(lu_piv, stage_rhs(f1 + (_ROS3_C[0] / h) * K1, 1))
    # third stage reuses f1: its stage point equals the second one
    K3 = scipy.linalg.lu_solve(lu_piv, stage_rhs(f1 + (_ROS3_C[1] / h) * K1 + (_ROS3_C[2] / h) * K2, 2))

    unew = u + _ROS3_M[0] * K1 + _ROS3_M[1] * K2 + _ROS3_M[2] * K3
    err = _ROS3_E[0] * K1 + _ROS3_E[1] * K2 + _ROS3_E[2] * K3
    if not (np.all(np.isfinite(unew)) and np.all(np.isfinite(err))):
        return None
    return unew, err


def _advance(
    system: OdeSystem, t: float, t_end: float, u: np.ndarray, params: Any, config: IntegratorConfig, control: _StepControl, diag: IntegrationDiagnostics
) -> np.ndarray:
    """Integrate from ``t`` to exactly ``t_end``."""
    while t < t_end:
        floor = ODE_STEP_FLOOR * max(1.0, abs(t))
        if t_end - t <= floor:
            break
        f0 = _rhs(system, t, u, params, diag)
        if control.h <= 0:
            control.h = _initial_step(u, f0, config)
        J = _jacobian(system, t, u, f0, params, diag)
        dfdt = None
        if not system.autonomous:
            delta = _SQRT_EPS * max(1e-5, abs(t))
            dfdt = (_rhs(system, t + delta, u, params, diag) - f0) / delta

        while True:
            if diag.attempted >= config.max_steps:
                raise _Failure(STATUS_STEP_BUDGET)
            span = t_end - t
            # stretch by at most 1% rather than leave a sliver before the breakpoint
            h = span if control.h * 1.01 >= span else control.h
            if h < floor:
                raise _Failure(STATUS_STEP_FLOOR)
            attempt = _ros3_attempt(system, t, u, h, f0, J, dfdt, params, diag)
            if attempt is None:
                diag.rejected += 1
                control.h = h * ODE_REJECT_FACTOR
                control.reject_more = control.reject_last
                control.reject_last = True
                continue
            unew, err = attempt
            norm = _error_norm(u, unew, err, config)
            fac = min(ODE_MAX_STEP_FACTOR, max(ODE_MIN_STEP_FACTOR, ODE_SAFETY / norm ** (1.0 / _ROS3_ELO)))
            h_new = h * fac
            if norm <= 1.0:
                diag.accepted += 1
                diag.min_step = min(diag.min_step, h)
                if control.reject_last:
                    # no growth right after a rejection
                    h_new = min(h_new, h)
                control.reject_last = False
                control.reject_more = False
                # a step shortened to hit a breakpoint must not shrink the next one
                control.h = max(h_new, control.h) if h < control.h else h_new
                t = t_end if h == span else t + h
                u = unew
                break
            diag.rejected += 1
            if control.reject_more:
                h_new = h * ODE_REJECT_FACTOR
            control.reject_more = control.reject_last
            control.reject_last = True
            control.h = h_new
    return u


def _run(
    system: OdeSystem,
    u0: Sequence[float],
    events: Sequence[DoseEvent],
    sample_times: Sequence[float],
    params: Any,
    config: Optional[IntegratorConfig],
) -> Tuple[Optional[np.ndarray], IntegrationDiagnostics]:
    config = (config or IntegratorConfig()).validate()
    u = np.array(u0, dtype=np.float64)
    times = np.asarray(sample_times, dtype=np.float64).reshape(-1)
    events = list(events)
    _check_inputs(system, u, events, times)

    diag = IntegrationDiagnostics()
    samples = np.empty((times.size, system.dim))
    if times.size == 0:
        return samples, diag

    breakpoints = sorted({0.0, *times.tolist(), *(e.time for e in events if e.time <= times[-1])})
    sample_index = {float(tau): k for k, tau in enumerate(times)}
    control = _StepControl(h=0.0)
    t = 0.0
    with np.errstate(all="ignore"):
        try:
            for tb in breakpoints:
                if tb > t:
                    u = _advance(system, t, tb, u, params, config, control, diag)
                    t = tb
                _apply_events(u, events, tb)
                if tb in sample_index:
                    samples[sample_index[tb]] = u
        except _Failure as failure:
            diag.status = failure.status
            logger.debug("ODE integration stopped at t=%g: %s after %d steps", t, failure.status, diag.attempted)
            return None, diag
    return samples, diag


def integrate(
    system: OdeSystem,
    u0: Sequence[float],
    events: Sequence[DoseEvent],
    sample_times: Sequence[float],
    params: Any = None,
    config: Optional[IntegratorConfig] = None,
) -> Optional[np.ndarray]:
    """Integrate ``system`` and sample the state.

    Args:
        system (OdeSystem): Right-hand side and optional Jacobian.
        u0 (Sequence[float]): State at ``t = 0`` before any dose.
        events (Sequence[DoseEvent]): Doses sorted by time.
        sample_times (Sequence[float]): Non-negative, strictly increasing.
        params (Any): Passed through to ``rhs`` and ``jac``.
        config (Optional[IntegratorConfig]): Tolerances and work bound.

    Returns:
        Optional[np.ndarray]: Samples of shape (len(sample_times), dim), or ``None`` when
        the integration is NOT-EVALUABLE.

    Raises:
        ContractViolationError: On unsorted times or events, or a mis-shaped ``u0``.
        ConfigError: On an invalid ``config``.
    """
    samples, _ = _run(system, u0, events, sample_times, params, config)
    return samples


def integrate_stiffness_check(
    system: OdeSystem,
    u0: Sequence[float],
    events: Sequence[DoseEvent],
    sample_times: Sequence[float],
    params: Any = None,
    config: Optional[IntegratorConfig] = None,
) -> IntegrationDiagnostics:
    """Same integration as :func:`integrate`, returning only its step telemetry."""
    _, diag = _run(system, u0, events, sample_times, params, config)
    return diag
