"""
Experiment specification.

An ExperimentSpec is the single source of every setting of one run. It round-trips through
JSON without loss, and CLI flags override a loaded spec field by field.
"""

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional

from cgnsolve.core.constants import (
    DEFAULT_CLUSTER_SIZE,
    DEFAULT_GAMMA,
    DEFAULT_K_MAX,
    DEFAULT_LAMBDA_INIT,
    DEFAULT_LAMBDA_MAX,
    DEFAULT_MAX_RESAMPLE,
    LM_FD_STEPS,
    RESIDUAL_SCALES,
    SOLVER_CGN,
    SOLVER_LM,
    SOLVERS,
)
from cgnsolve.core.utils import ConfigError
from cgnsolve.harness.artifacts import read_json, write_json
from cgnsolve.problems.registry import get_entry
from cgnsolve.solvers.baseline import LmConfig
from cgnsolve.solvers.cgn import CgnConfig


@dataclass(frozen=True)
class ExperimentSpec:
    problem_id: str
    solver: str = SOLVER_CGN
    cluster_size: int = DEFAULT_CLUSTER_SIZE
    gamma: float = DEFAULT_GAMMA
    lambda_init: float = DEFAULT_LAMBDA_INIT
    lambda_max: float = DEFAULT_LAMBDA_MAX
    k_max: int = DEFAULT_K_MAX
    max_resample: int = DEFAULT_MAX_RESAMPLE
    fd_step: Optional[float] = None
    lm_max_evals: Optional[int] = None
    seed: int = 0
    output_dir: str = "results"
    residual_scale: Optional[str] = None
    noise: Optional[float] = None
    dataset_dir: Optional[str] = None
    workers: int = 1
    keep_history: bool = False

    @property
    def scale(self) -> str:
        """Residual scale, falling back to the problem default."""
        return self.residual_scale or get_entry(self.problem_id).default_scale

    @property
    def noise_sd_frac(self) -> float:
        return get_entry(self.problem_id).default_noise if self.noise is None else self.noise

    def cgn_config(self) -> CgnConfig:
        return CgnConfig(
            cluster_size=self.cluster_size,
            lambda_init=self.lambda_init,
            lambda_max=self.lambda_max,
            gamma=self.gamma,
            k_max=self.k_max,
            seed=self.seed,
            max_resample=self.max_resample,
            workers=self.workers,
        )

    def lm_config(self) -> LmConfig:
        fd_step = self.fd_step if self.fd_step is not None else LM_FD_STEPS.get(self.solver, LM_FD_STEPS[SOLVER_LM])
        return LmConfig(lambda_init=self.lambda_init, fd_step=fd_step, max_evals=self.lm_max_evals)

    def validate(self) -> "ExperimentSpec":
        """Check every field; the solver configs are validated too.

        Raises:
            ConfigError: On the first invalid field.
        """
        get_entry(self.problem_id)
        if self.solver not in SOLVERS:
            raise ConfigError(f"unknown solver {self.solver!r}; expected one of {', '.join(SOLVERS)}")
        if self.residual_scale is not None and self.residual_scale not in RESIDUAL_SCALES:
            raise ConfigError(f"unknown residual scale {self.residual_scale!r}; expected one of {', '.join(RESIDUAL_SCALES)}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        if self.noise is not None and self.noise < 0:
            raise ConfigError(f"noise must be >= 0, got {self.noise}")
        self.cgn_config().validate()
        if self.solver != SOLVER_CGN:
            self.lm_config().validate()
        return self

    def with_overrides(self, **overrides: Any) -> "ExperimentSpec":
        """Copy with every non-None override applied."""
        values = {key: value for key, value in overrides.items() if value is not None}
        unknown = set(values) - {f.name for f in dataclasses.fields(self)}
        if unknown:
            raise ConfigError(f"unknown spec field(s): {', '.join(sorted(unknown))}")
        return dataclasses.replace(self, **values)

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "ExperimentSpec":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(payload) - names
        if unknown:
            raise ConfigError(f"unknown spec field(s): {', '.join(sorted(unknown))}")
        if "problem_id" not in payload:
            raise ConfigError("spec is missing problem_id")
        return cls(**payload)

    def save(self, path: Path) -> Path:
        return write_json(Path(path), self.to_dict())

    @classmethod
    def load(cls, path: Path) -> "ExperimentSpec":
        return cls.from_dict(read_json(Path(path)))
