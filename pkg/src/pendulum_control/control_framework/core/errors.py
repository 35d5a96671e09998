# src/pendulum_control/control_framework/core/errors.py

from enum import IntEnum
from typing import Any, Optional


class ExitStatus(IntEnum):
    """Process exit codes of the CLI. These values are stable across releases."""
    SUCCESS = 0
    USAGE = 1
    DATA = 2
    NUMERICAL = 3


class PendulumControlError(Exception):
    """Base class for every error raised by the toolkit."""
    exit_status = ExitStatus.NUMERICAL


class DomainError(PendulumControlError, ValueError):
    """Non-finite or out-of-domain input to a dynamics or control operation."""
    exit_status = ExitStatus.USAGE


class ContinuumError(DomainError):
    """Every state with zero velocity is an equilibrium (no gravity term)."""


class IntegrationOverflowError(PendulumControlError):
    def __init__(self, message: str, step: Optional[int] = None):
        super().__init__(message)
        self.step = step


class PreconditionError(PendulumControlError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class NotStabilizableError(PendulumControlError):
    pass


class ConvergenceError(PendulumControlError):
    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class InstabilityError(PendulumControlError):
    pass


class LogParseError(PendulumControlError):
    exit_status = ExitStatus.DATA

    def __init__(self, message: str, row: Optional[int] = None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class SingularDesignError(PendulumControlError):
    pass


class InsufficientDataError(PendulumControlError):
    exit_status = ExitStatus.DATA


class InconsistentSignError(PendulumControlError):
    exit_status = ExitStatus.DATA


class MixedKindError(PendulumControlError):
    exit_status = ExitStatus.USAGE


class ConfigError(PendulumControlError):
    exit_status = ExitStatus.USAGE


class DivergenceError(PendulumControlError):
    """Closed-loop run left the region where the linearization holds."""

    def __init__(self, message: str, partial: Any, step: int):
        super().__init__(message)
        self.partial = partial
        self.step = step


class RangeError(PendulumControlError):
    exit_status = ExitStatus.DATA


class AlignmentError(PendulumControlError):
    exit_status = ExitStatus.DATA
