"""Problem suite addressable by string id."""

from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

from cgnsolve.core.constants import DEFAULT_NOISE_SD_FRAC, RESIDUAL_SCALE_LINEAR, RESIDUAL_SCALE_LOG10
from cgnsolve.core.utils import ConfigError
from cgnsolve.problems.base import Problem, rounded
from cgnsolve.problems.pbpk import PBPK_ID, PBPK_ROUNDED_ID, PBPK_SINGLE_ID, pbpk_problem, pbpk_single_problem
from cgnsolve.problems.pk import FLIPFLOP_ID, IV_AMOUNT_ID, flipflop_problem, iv_amount_problem
from cgnsolve.problems.toy import TOY_ID, toy_problem


@dataclass(frozen=True)
class ProblemEntry:
    problem_id: str
    factory: Callable[[str], Problem]
    default_scale: str
    default_noise: float
    description: str


_REGISTRY: Dict[str, ProblemEntry] = {
    entry.problem_id: entry
    for entry in (
        ProblemEntry(TOY_ID, toy_problem, RESIDUAL_SCALE_LINEAR, 0.0, "piecewise 1-D function, flat minimum on [-1, 1]"),
        ProblemEntry(FLIPFLOP_ID, flipflop_problem, RESIDUAL_SCALE_LOG10, 0.0, "oral one-compartment PK, two global minimisers"),
        ProblemEntry(IV_AMOUNT_ID, iv_amount_problem, RESIDUAL_SCALE_LOG10, DEFAULT_NOISE_SD_FRAC, "IV amount, line of minimisers"),
        ProblemEntry(PBPK_ID, pbpk_problem, RESIDUAL_SCALE_LOG10, DEFAULT_NOISE_SD_FRAC, "20-state PBPK, three oral doses"),
        ProblemEntry(
            PBPK_ROUNDED_ID, lambda scale: rounded(pbpk_problem(scale)), RESIDUAL_SCALE_LOG10, DEFAULT_NOISE_SD_FRAC, "PBPK outputs rounded to 0.1"
        ),
        ProblemEntry(PBPK_SINGLE_ID, pbpk_single_problem, RESIDUAL_SCALE_LOG10, DEFAULT_NOISE_SD_FRAC, "20-state PBPK, single oral dose"),
    )
}


def problem_ids() -> Tuple[str, ...]:
    return tuple(_REGISTRY)


def get_entry(problem_id: str) -> ProblemEntry:
    """Registry entry for ``problem_id``.

    Raises:
        ConfigError: If the id is unknown.
    """
    try:
        return _REGISTRY[problem_id]
    except KeyError:
        raise ConfigError(f"unknown problem id {problem_id!r}; expected one of {', '.join(_REGISTRY)}") from None


def problem_template(problem_id: str, residual_scale: Optional[str] = None) -> Problem:
    """Problem without fitted data (the toy problem carries its fixed target)."""
    entry = get_entry(problem_id)
    return entry.factory(residual_scale or entry.default_scale)
