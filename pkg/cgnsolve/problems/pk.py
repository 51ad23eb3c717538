"""
Closed-form pharmacokinetic models.

Flip-flop model (oral dose, one compartment)::

    du1/dt = -Ka u1,        u1(0) = 100
    du2/dt = Ka u1 / V - (CL / V) u2

observed through the concentration ``u2``; absorption and elimination rates can be exchanged,
so the problem has two global minimisers. The IV-amount model ``du/dt = -(CL/V) u`` depends on
the parameters only through ``CL / V`` and has a line of minimisers.

Parameters are log10: ``CL = 10^x1``, ``Ka = 10^x2``, ``V = 10^x3`` (IV: ``CL = 10^x1``, ``V = 10^x2``).
"""

from typing import Sequence, Tuple

import numpy as np

from cgnsolve.core.constants import RESIDUAL_SCALE_LOG10
from cgnsolve.core.ode import OdeSystem
from cgnsolve.problems.base import Problem

PK_DOSE = 100.0

FLIPFLOP_ID = "flipflop"
FLIPFLOP_TRUTH_X = (0.0, 0.0, 1.0)
FLIPFLOP_TIMES = (0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 24.0)
FLIPFLOP_RANGE = ((-2.0, -2.0, -2.0), (2.0, 2.0, 2.0))

IV_AMOUNT_ID = "iv_amount"
IV_AMOUNT_TRUTH_X = (0.0, 1.0)
IV_AMOUNT_TIMES = (0.5, 1.0, 2.0, 4.0, 8.0, 12.0, 24.0)
IV_AMOUNT_RANGE = ((-2.0, -2.0), (2.0, 2.0))


def _bateman_kernel(k1: float, k2: float, t: np.ndarray) -> np.ndarray:
    """``(exp(-k1 t) - exp(-k2 t)) / (k2 - k1)``, symmetric in (k1, k2), ``t exp(-k t)`` at k1 = k2."""
    lo, hi = min(k1, k2), max(k1, k2)
    diff = hi - lo
    if diff == 0.0:
        return t * np.exp(-lo * t)
    return np.exp(-lo * t) * -np.expm1(-diff * t) / diff


def eval_flipflop(x: Sequence[float], times: Sequence[float]) -> np.ndarray:
    """Concentration ``u2`` of the flip-flop model at ``times``."""
    cl, ka, v = 10.0 ** np.asarray(x, dtype=np.float64)
    t = np.asarray(times, dtype=np.float64)
    ke = cl / v
    return PK_DOSE * ka / v * _bateman_kernel(ka, ke, t)


def flipflop_swap(x: Sequence[float]) -> Tuple[float, float, float]:
    """The second minimiser: exchanges Ka and CL/V while keeping CL and Ka/V."""
    x1, x2, x3 = (float(v) for v in x)
    return (x1, x1 - x3, x1 - x2)


def _flipflop_rhs(t: float, u: np.ndarray, params: Tuple[float, float, float]) -> np.ndarray:
    cl, ka, v = params
    return np.array([-ka * u[0], ka * u[0] / v - cl / v * u[1]])


def _flipflop_jac(t: float, u: np.ndarray, params: Tuple[float, float, float]) -> np.ndarray:
    cl, ka, v = params
    return np.array([[-ka, 0.0], [ka / v, -cl / v]])


def flipflop_system() -> OdeSystem:
    """ODE form of the flip-flop model; ``params`` are the linear (CL, Ka, V)."""
    return OdeSystem(dim=2, rhs=_flipflop_rhs, jac=_flipflop_jac)


def eval_iv_amount(x: Sequence[float], times: Sequence[float]) -> np.ndarray:
    """Amount ``100 exp(-(CL/V) t)``."""
    x1, x2 = np.asarray(x, dtype=np.float64)
    t = np.asarray(times, dtype=np.float64)
    return PK_DOSE * np.exp(-(10.0 ** (x1 - x2)) * t)


def flipflop_problem(residual_scale: str = RESIDUAL_SCALE_LOG10) -> Problem:
    times = np.array(FLIPFLOP_TIMES)
    return Problem(
        problem_id=FLIPFLOP_ID,
        model=lambda x: eval_flipflop(x, times),
        range_lo=np.array(FLIPFLOP_RANGE[0]),
        range_hi=np.array(FLIPFLOP_RANGE[1]),
        residual_scale=residual_scale,
        param_names=("log10_CL", "log10_Ka", "log10_V"),
        obs_times=times,
        obs_groups=("oral",) * times.size,
        truth_x=np.array(FLIPFLOP_TRUTH_X),
    )


def iv_amount_problem(residual_scale: str = RESIDUAL_SCALE_LOG10) -> Problem:
    times = np.array(IV_AMOUNT_TIMES)
    return Problem(
        problem_id=IV_AMOUNT_ID,
        model=lambda x: eval_iv_amount(x, times),
        range_lo=np.array(IV_AMOUNT_RANGE[0]),
        range_hi=np.array(IV_AMOUNT_RANGE[1]),
        residual_scale=residual_scale,
        param_names=("log10_CL", "log10_V"),
        obs_times=times,
        obs_groups=("iv",) * times.size,
        truth_x=np.array(IV_AMOUNT_TRUTH_X),
    )
