"""
Physiologically based pharmacokinetic model of an orally dosed, liver-cleared drug.

Twenty states (0-based here)::

    0        blood                          1..3   muscle, skin, adipose
    4,6,..12 liver sinusoids 1..5           5,7,..13 hepatocytes 1..5
    14..16   biliary transit compartments   17     intestine (dose site)
    18       metabolised amount             19     urinary amount

States 18 and 19 only accumulate what leaves through metabolism and urine. The dose is placed
in the intestine at t = 0 and the blood concentration is observed.

Nine estimated parameters map to the model as ``CL_bile = 10^x1``, ``CL_met = 10^x2``,
``Km_uptake = 10^x3``, ``Kp_scalar = e^x4 / (1 + e^x4)``, ``PS_dif = 10^x5``, ``V_b = 10^x6``,
``Vmax_uptake = 10^x7``, ``ka = 10^x8``, ``k_bile = 10^x9``.
"""

from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import scipy.special

from cgnsolve.core.constants import RESIDUAL_SCALE_LOG10
from cgnsolve.core.ode import DOSE_SET, DoseEvent, IntegratorConfig, OdeSystem, integrate
from cgnsolve.problems.base import Problem

PBPK_ID = "pbpk_ex1"
PBPK_ROUNDED_ID = "pbpk_ex1_rounded"
PBPK_SINGLE_ID = "pbpk_single"

N_STATES = 20
BLOOD = 0
INTESTINE = 17
SINUSOIDS = (4, 6, 8, 10, 12)
HEPATOCYTES = (5, 7, 9, 11, 13)
N_LIVER_SEGMENTS = len(SINUSOIDS)

# fixed physiology
CL_R = 0.0
FAFG = 0.55
KP_A = 0.086
KP_M = 0.113
KP_S = 0.478
Q_A = 15.61
Q_H = 86.94
Q_M = 44.94
Q_S = 17.99
V_A = 10.01
V_HC = 1.218
V_HE = 0.469
V_M = 30.03
V_S = 7.77
F_B = 0.00617
F_H = 0.012

DOSE_LEVELS: Dict[str, float] = {"low": 30000.0, "mid": 100000.0, "high": 300000.0}
SINGLE_DOSE = 100000.0
PBPK_TIMES = (2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 24.0, 36.0, 48.0, 72.0)

PBPK_PARAM_NAMES = (
    "log10_CL_bile",
    "log10_CL_met",
    "log10_Km_uptake",
    "logit_Kp_scalar",
    "log10_PS_dif",
    "log10_V_b",
    "log10_Vmax_uptake",
    "log10_ka",
    "log10_k_bile",
)
PBPK_TRUTH_X = (1.0, 1.0, 2.0, 0.0, 0.0, 0.7, 3.0, -1.3, -0.5)
PBPK_BOX_HALF_WIDTH = 2.0


@dataclass(frozen=True)
class PbpkParameters:
    cl_bile: float
    cl_met: float
    km: float
    kp_scalar: float
    ps: float
    v_b: float
    vmax: float
    ka: float
    k_bile: float

    @classmethod
    def from_x(cls, x: Sequence[float]) -> "PbpkParameters":
        x = np.asarray(x, dtype=np.float64)
        return cls(
            cl_bile=10.0 ** x[0],
            cl_met=10.0 ** x[1],
            km=10.0 ** x[2],
            kp_scalar=float(scipy.special.expit(x[3])),
            ps=10.0 ** x[4],
            v_b=10.0 ** x[5],
            vmax=10.0 ** x[6],
            ka=10.0 ** x[7],
            k_bile=10.0 ** x[8],
        )


def pbpk_rhs(t: float, u: np.ndarray, p: PbpkParameters) -> np.ndarray:
    du = np.empty(N_STATES)
    inv_m = 1.0 / (KP_M * p.kp_scalar)
    inv_s = 1.0 / (KP_S * p.kp_scalar)
    inv_a = 1.0 / (KP_A * p.kp_scalar)
    du[0] = (
        Q_H * (u[SINUSOIDS[-1]] - u[0]) - CL_R * u[0] - Q_M * (u[0] - u[1] * inv_m) - Q_S * (u[0] - u[2] * inv_s) - Q_A * (u[0] - u[3] * inv_a)
    ) / p.v_b
    du[1] = Q_M / V_M * (u[0] - u[1] * inv_m)
    du[2] = Q_S / V_S * (u[0] - u[2] * inv_s)
    du[3] = Q_A / V_A * (u[0] - u[3] * inv_a)

    v_segment = V_HC / N_LIVER_SEGMENTS
    hep_clearance = F_H * (p.ps + p.cl_met + p.cl_bile) / V_HE
    upstream = u[0]
    for k, (s, h) in enumerate(zip(SINUSOIDS, HEPATOCYTES)):
        uptake = (p.vmax / (p.km + u[s]) + F_B * p.ps) * u[s]
        inflow = Q_H * (upstream - u[s])
        if k == 0:
            inflow += p.ka * u[INTESTINE]
        du[s] = -uptake / V_HC + F_H * p.ps / V_HC * u[h] + inflow / v_segment
        du[h] = uptake / V_HE - hep_clearance * u[h]
        upstream = u[s]

    hep_mean = np.mean(u[list(HEPATOCYTES)])
    du[14] = F_H * p.cl_bile * hep_mean - p.k_bile * u[14]
    du[15] = p.k_bile * (u[14] - u[15])
    du[16] = p.k_bile * (u[15] - u[16])
    du[17] = p.k_bile * u[16] - p.ka / FAFG * u[17]
    du[18] = F_H * p.cl_met * hep_mean
    du[19] = CL_R * u[0]
    return du


def pbpk_jac(t: float, u: np.ndarray, p: PbpkParameters) -> np.ndarray:
    J = np.zeros((N_STATES, N_STATES))
    inv_m = 1.0 / (KP_M * p.kp_scalar)
    inv_s = 1.0 / (KP_S * p.kp_scalar)
    inv_a = 1.0 / (KP_A * p.kp_scalar)
    J[0, 0] = -(Q_H + CL_R + Q_M + Q_S + Q_A) / p.v_b
    J[0, 1] = Q_M * inv_m / p.v_b
    J[0, 2] = Q_S * inv_s / p.v_b
    J[0, 3] = Q_A * inv_a / p.v_b
    J[0, SINUSOIDS[-1]] = Q_H / p.v_b
    J[1, 0], J[1, 1] = Q_M / V_M, -Q_M / V_M * inv_m
    J[2, 0], J[2, 2] = Q_S / V_S, -Q_S / V_S * inv_s
    J[3, 0], J[3, 3] = Q_A / V_A, -Q_A / V_A * inv_a

    v_segment = V_HC / N_LIVER_SEGMENTS
    hep_clearance = F_H * (p.ps + p.cl_met + p.cl_bile) / V_HE
    upstream = BLOOD
    for k, (s, h) in enumerate(zip(SINUSOIDS, HEPATOCYTES)):
        # d/du of (Vmax / (Km + u) + f_b PS) u
        d_uptake = p.vmax * p.km / (p.km + u[s]) ** 2 + F_B * p.ps
        J[s, s] = -d_uptake / V_HC - Q_H / v_segment
        J[s, h] = F_H * p.ps / V_HC
        J[s, upstream] = Q_H / v_segment
        if k == 0:
            J[s, INTESTINE] = p.ka / v_segment
        J[h, s] = d_uptake / V_HE
        J[h, h] = -hep_clearance
        upstream = s

    for h in HEPATOCYTES:
        J[14, h] = F_H * p.cl_bile / N_LIVER_SEGMENTS
        J[18, h] = F_H * p.cl_met / N_LIVER_SEGMENTS
    J[14, 14] = -p.k_bile
    J[15, 14], J[15, 15] = p.k_bile, -p.k_bile
    J[16, 15], J[16, 16] = p.k_bile, -p.k_bile
    J[17, 16], J[17, 17] = p.k_bile, -p.ka / FAFG
    J[19, 0] = CL_R
    return J


def pbpk_system() -> OdeSystem:
    return OdeSystem(dim=N_STATES, rhs=pbpk_rhs, jac=pbpk_jac)


def simulate_pbpk(
    x: Sequence[float], dose: float, times: Sequence[float] = PBPK_TIMES, config: Optional[IntegratorConfig] = None
) -> Optional[np.ndarray]:
    """Full state trajectory sampled at ``times`` (shape len(times) x 20), or ``None``."""
    params = PbpkParameters.from_x(x)
    events = [DoseEvent(time=0.0, state_index=INTESTINE, amount=dose, mode=DOSE_SET)]
    return integrate(pbpk_system(), np.zeros(N_STATES), events, times, params, config)


def eval_pbpk(
    x: Sequence[float], dose_level: str, times: Sequence[float] = PBPK_TIMES, config: Optional[IntegratorConfig] = None
) -> Optional[np.ndarray]:
    """Blood concentration at ``times`` after the ``dose_level`` dose, or ``None``."""
    samples = simulate_pbpk(x, DOSE_LEVELS[dose_level], times, config)
    return None if samples is None else samples[:, BLOOD]


def _multi_dose_model(x: np.ndarray) -> Optional[np.ndarray]:
    outputs = []
    for level in DOSE_LEVELS:
        y = eval_pbpk(x, level)
        if y is None:
            return None
        outputs.append(y)
    return np.concatenate(outputs)


def _single_dose_model(x: np.ndarray) -> Optional[np.ndarray]:
    samples = simulate_pbpk(x, SINGLE_DOSE)
    return None if samples is None else samples[:, BLOOD]


def pbpk_box(truth_x: Sequence[float] = PBPK_TRUTH_X, half_width: float = PBPK_BOX_HALF_WIDTH) -> Tuple[np.ndarray, np.ndarray]:
    truth = np.asarray(truth_x, dtype=np.float64)
    return truth - half_width, truth + half_width


def pbpk_problem(residual_scale: str = RESIDUAL_SCALE_LOG10) -> Problem:
    """Three dose levels, ten samples each (m = 30)."""
    lo, hi = pbpk_box()
    times = np.array(PBPK_TIMES)
    return Problem(
        problem_id=PBPK_ID,
        model=_multi_dose_model,
        range_lo=lo,
        range_hi=hi,
        residual_scale=residual_scale,
        param_names=PBPK_PARAM_NAMES,
        obs_times=np.tile(times, len(DOSE_LEVELS)),
        obs_groups=tuple(level for level in DOSE_LEVELS for _ in PBPK_TIMES),
        truth_x=np.array(PBPK_TRUTH_X),
    )


def pbpk_single_problem(residual_scale: str = RESIDUAL_SCALE_LOG10) -> Problem:
    """One oral dose of 100000, ten samples (m = 10)."""
    lo, hi = pbpk_box()
    times = np.array(PBPK_TIMES)
    return Problem(
        problem_id=PBPK_SINGLE_ID,
        model=_single_dose_model,
        range_lo=lo,
        range_hi=hi,
        residual_scale=residual_scale,
        param_names=PBPK_PARAM_NAMES,
        obs_times=times,
        obs_groups=("single",) * times.size,
        truth_x=np.array(PBPK_TRUTH_X),
    )
