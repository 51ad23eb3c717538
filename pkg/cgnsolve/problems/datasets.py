"""
Synthetic datasets with multiplicative Gaussian noise.

``y* = f(truth_x) (1 + eps)`` with ``eps = noise_sd_frac * z`` and ``z`` a standard normal
truncated at +-5, drawn by inverse CDF from the ``dataset`` substream of the seed. The SSR of
the generating parameters on the noisy data (truth SSR) is the acceptance threshold of a run.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from cgnsolve.core.constants import DEFAULT_NOISE_SD_FRAC, NOISE_CLIP_SIGMAS, ZERO_NOISE_ACCEPT_SSR
from cgnsolve.core.random_streams import STREAM_DATASET, named_stream, standard_normal_inverse_cdf
from cgnsolve.core.utils import ConfigError, ContractViolationError, logger
from cgnsolve.problems.base import Problem
from cgnsolve.problems.registry import problem_template


@dataclass(frozen=True, eq=False)
class Dataset:
    problem_id: str
    y_star: np.ndarray
    truth_x: np.ndarray
    noise_seed: int
    residual_scale: str
    noise_sd_frac: float
    truth_ssr: float
    obs_times: np.ndarray
    obs_groups: Tuple[str, ...]

    @property
    def acceptance_threshold(self) -> float:
        return self.truth_ssr if self.truth_ssr > 0 else ZERO_NOISE_ACCEPT_SSR

    def acceptable(self, ssr: Union[float, np.ndarray]) -> np.ndarray:
        """Members whose SSR is below the truth SSR (at most 1e-8 for noise-free data)."""
        ssr = np.asarray(ssr, dtype=np.float64)
        if self.truth_ssr > 0:
            return ssr < self.truth_ssr
        return ssr <= ZERO_NOISE_ACCEPT_SSR


def make_dataset_for(problem: Problem, truth_x: Optional[Sequence[float]], noise_sd_frac: float, seed: int) -> Dataset:
    """Dataset for a problem template.

    Raises:
        ConfigError: If ``noise_sd_frac`` is outside [0, 0.2) or no truth is known.
        ContractViolationError: If the truth is not evaluable.
    """
    if not 0.0 <= noise_sd_frac < 1.0 / NOISE_CLIP_SIGMAS:
        raise ConfigError(f"noise_sd_frac must be in [0, {1.0 / NOISE_CLIP_SIGMAS:g}), got {noise_sd_frac}")
    if truth_x is None:
        truth_x = problem.truth_x
    if truth_x is None:
        raise ConfigError(f"problem {problem.problem_id} has no default truth; pass truth_x")
    truth = np.asarray(truth_x, dtype=np.float64).reshape(-1)

    with np.errstate(all="ignore"):
        clean = problem.model(truth)
    if clean is None or not np.all(np.isfinite(clean)):
        raise ContractViolationError(f"truth parameters of {problem.problem_id} are not evaluable")
    clean = np.asarray(clean, dtype=np.float64).reshape(-1)

    z = np.clip(standard_normal_inverse_cdf(named_stream(seed, STREAM_DATASET), clean.size), -NOISE_CLIP_SIGMAS, NOISE_CLIP_SIGMAS)
    y_star = clean * (1.0 + noise_sd_frac * z)

    fitted = problem.with_observed(y_star, truth)
    y_truth = fitted.evaluate(truth)
    if y_truth is None:
        raise ContractViolationError(f"truth parameters of {problem.problem_id} are not evaluable on the {problem.residual_scale} scale")
    truth_ssr = fitted.ssr(y_truth)
    logger.debug("Dataset %s seed=%d noise=%g truth_ssr=%.6g", problem.problem_id, seed, noise_sd_frac, truth_ssr)

    times = problem.obs_times if problem.obs_times is not None else np.arange(y_star.size, dtype=np.float64)
    groups = problem.obs_groups or ("none",) * y_star.size
    return Dataset(
        problem_id=problem.problem_id,
        y_star=y_star,
        truth_x=truth,
        noise_seed=int(seed),
        residual_scale=problem.residual_scale,
        noise_sd_frac=float(noise_sd_frac),
        truth_ssr=truth_ssr,
        obs_times=np.asarray(times, dtype=np.float64),
        obs_groups=tuple(groups),
    )


def make_dataset(
    problem_id: str,
    truth_x: Optional[Sequence[float]] = None,
    noise_sd_frac: float = DEFAULT_NOISE_SD_FRAC,
    seed: int = 0,
    residual_scale: Optional[str] = None,
) -> Dataset:
    """Synthetic dataset for a registered problem (see module docstring)."""
    return make_dataset_for(problem_template(problem_id, residual_scale), truth_x, noise_sd_frac, seed)


def apply_dataset(problem: Problem, dataset: Dataset) -> Problem:
    """``problem`` fitted against the observations of ``dataset``.

    Raises:
        ContractViolationError: If the dataset was made for a different problem shape or scale.
    """
    if dataset.residual_scale != problem.residual_scale:
        raise ContractViolationError(f"dataset scale {dataset.residual_scale} does not match problem scale {problem.residual_scale}")
    if problem.obs_times is not None and dataset.y_star.size != problem.obs_times.size:
        raise ContractViolationError(f"dataset has {dataset.y_star.size} observations, problem expects {problem.obs_times.size}")
    return problem.with_observed(dataset.y_star, dataset.truth_x)
