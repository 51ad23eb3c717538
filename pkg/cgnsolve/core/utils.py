"""
Utility definitions shared by every cgn-solve module.

This module provides the exception hierarchy and the package logger. NOT-EVALUABLE model
outcomes are values (``None``), never exceptions; the errors below are reserved for broken
contracts, configuration mistakes and genuine numerical failures.
"""

import logging
import os
from typing import Optional

from cgnsolve.core.constants import ENV_LOG_LEVEL, ENV_WORKERS


class CgnSolveError(Exception):
    """Base exception for cgn-solve errors."""


class ContractViolationError(CgnSolveError):
    """An operation was called with arguments violating its preconditions."""


class NumericalFailureError(CgnSolveError):
    """A dense factorisation did not converge."""


class InitializationError(CgnSolveError):
    """A cluster column could not be made evaluable."""

    def __init__(self, column: int, attempts: int):
        super().__init__(f"Initial cluster column {column} is not evaluable after {attempts} attempts")
        self.column = column
        self.attempts = attempts


class DegenerateClusterError(CgnSolveError):
    """Every weight of a linear approximation is zero."""


class JacobianFailureError(CgnSolveError):
    """A perturbed point of a finite-difference Jacobian is not evaluable."""

    def __init__(self, column: int):
        super().__init__(f"Finite-difference Jacobian column {column} is not evaluable")
        self.column = column


class ConfigError(CgnSolveError):
    """Invalid configuration or experiment specification."""


class ArtifactError(CgnSolveError):
    """An artifact file or directory cannot be read or written."""


# Configure logging for every module that imports utils
LOG_LEVEL = os.environ.get(ENV_LOG_LEVEL, "INFO").upper()
logging.basicConfig(level=getattr(logging, LOG_LEVEL, logging.INFO), format="[%(levelname)s] %(message)s")
logger = logging.getLogger("cgn-solve")


def default_workers(value: Optional[int] = None) -> int:
    """Resolve the worker count from an explicit value or the environment.

    Args:
        value (Optional[int]): Explicit worker count, used when given.

    Returns:
        int: Worker count (at least 1).

    Raises:
        ConfigError: If the environment variable is not an integer.
    """
    if value is not None:
        return max(1, int(value))
    raw = os.environ.get(ENV_WORKERS)
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError as e:
        raise ConfigError(f"{ENV_WORKERS} must be an integer, got {raw!r}") from e
