"""
Exception hierarchy; every error carries the process exit code it maps to
"""

from typing import Any, Optional

from config import (
    EXIT_CALIBRATION_ERROR,
    EXIT_CONFIG_ERROR,
    EXIT_NON_CONVERGENCE,
    EXIT_NUMERIC_FAILURE,
    EXIT_UNEXPECTED,
)


class SlopeAmpError(Exception):
    exit_code = EXIT_UNEXPECTED
    message_key = 'unexpected'


class ConfigError(SlopeAmpError):
    exit_code = EXIT_CONFIG_ERROR
    message_key = 'config_error'


class ParseError(ConfigError):
    def __init__(self, path: str, line: int, reason: str):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {reason}")


class DimensionError(ConfigError, ValueError):
    pass


class NumericFailure(SlopeAmpError):
    exit_code = EXIT_NUMERIC_FAILURE
    message_key = 'numeric_failure'

    def __init__(self, iteration: int, quantity: str, solver: str = "amp"):
        self.iteration = iteration
        self.quantity = quantity
        self.solver = solver
        super().__init__(f"{solver}: non-finite {quantity} at iteration {iteration}")


class NonConvergence(SlopeAmpError):
    exit_code = EXIT_NON_CONVERGENCE
    message_key = 'non_convergence'

    def __init__(self, message: str, iterations: int, result: Optional[Any] = None):
        self.iterations = iterations
        self.result = result
        super().__init__(f"{message} (after {iterations} iterations)")


class CalibrationError(SlopeAmpError):
    exit_code = EXIT_CALIBRATION_ERROR
    message_key = 'calibration_error'


class AlphaBelowAmin(CalibrationError):
    def __init__(self, f_value: float, delta: float):
        self.f_value = f_value
        self.delta = delta
        super().__init__(
            f"f(alpha) = {f_value:.6g} >= delta = {delta:.6g}; alpha is not above A_min"
        )


class NonMonotoneSign(CalibrationError):
    pass


class NoBracket(CalibrationError):
    pass
