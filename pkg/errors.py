"""
Engine Errors

Exception hierarchy shared by models, solvers and the CLI.
"""

from enum import Enum
from typing import Optional


EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_VALIDATION = 3
EXIT_CAP = 4


class WitnessEngineError(Exception):
    """Base class for all engine errors."""

    exit_code = 1


class ValidationError(WitnessEngineError, ValueError):
    """Invalid model, instance, partition or usage."""

    exit_code = EXIT_VALIDATION


class ParseError(ValidationError):
    """Malformed input text."""

    def __init__(self, message: str, line_no: Optional[int] = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class PartitionViolation(str, Enum):
    """Reasons a block list is not a usable directed tree partition."""

    COVERAGE = "coverage violation"
    DISJOINTNESS = "disjointness violation"
    EMPTY_BLOCK = "empty block"
    UNKNOWN_STATE = "unknown state"
    QUOTIENT_TWO_CYCLE = "quotient has a 2-cycle"
    QUOTIENT_CYCLE = "quotient not a tree (cycle)"
    IN_DEGREE = "quotient not a tree (in-degree > 1)"
    MULTIPLE_ROOTS = "quotient not a tree (multiple roots)"
    NOT_PATH = "quotient is not a path"
    GOAL_SPLIT = "goal-block condition violated"
    INITIAL_OUTSIDE_ROOT = "initial state outside root block"


class PartitionError(ValidationError):
    """A block list violates a directed tree partition condition."""

    def __init__(self, reason: PartitionViolation, detail: str = ""):
        message = reason.value if not detail else f"{reason.value}: {detail}"
        super().__init__(message)
        self.reason = reason
        self.detail = detail


class CapExceededError(WitnessEngineError, RuntimeError):
    """A configured search cap was exceeded."""

    exit_code = EXIT_CAP

    def __init__(self, cap_name: str, limit: int, actual: int, hint: str = ""):
        message = f"{cap_name} cap exceeded: {actual} > {limit}"
        if hint:
            message = f"{message} ({hint})"
        super().__init__(message)
        self.cap_name = cap_name
        self.limit = limit
        self.actual = actual


class ConvergenceError(WitnessEngineError, RuntimeError):
    """Float-mode iteration did not converge within the iteration cap."""

    def __init__(self, iterations: int, residual: float):
        super().__init__(
            f"value iteration did not converge after {iterations} iterations "
            f"(residual {residual:.3e})"
        )
        self.iterations = iterations
        self.residual = residual
