# Python module: errors.py

"""Error taxonomy shared by every SubshiftLab module.

Each error carries the process exit code ``main.py`` reports when it escapes
a subcommand: 1 for check/domain failures, 2 for usage and configuration
problems, 3 for resolution and budget failures.
"""

from typing import Any, Dict, Optional


class LabError(Exception):
    """Base class for all SubshiftLab errors."""

    exit_code = 1

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = details

    def to_dict(self) -> Dict[str, Any]:
        return {"error": type(self).__name__, "message": self.message, **self.details}


class DomainError(LabError, ValueError):
    """An argument lies outside the domain of an operation."""


class ClassificationError(DomainError):
    """A matrix is not in the conjugacy class an operation requires."""


class UndefinedDirectionError(DomainError):
    """The most contracted direction of a conformal matrix is not defined."""


class OutsideBandError(DomainError):
    """An energy lies outside the interior of every band."""


class IndexOutOfWindowError(DomainError, IndexError):
    """A two-sided transfer index exceeds the potential window."""


class ConstructionPreconditionError(DomainError):
    """Seed words do not satisfy the construction's hypotheses."""


class PreconditionError(DomainError):
    """Gap-closing preconditions fail (gaps too wide, epsilon too large)."""


class ConfigError(LabError):
    """Configuration file or override could not be parsed or validated."""

    exit_code = 2

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        location = ""
        if key is not None:
            location = f" [key '{key}'" + (f", line {line}]" if line is not None else "]")
        super().__init__(message + location, key=key, line=line)


class StageParseError(LabError):
    """A stage file is malformed or violates a stage invariant."""

    exit_code = 2

    def __init__(self, message: str, path: Optional[str] = None, location: Optional[str] = None):
        where = f" ({path}" + (f": {location})" if location else ")") if path else ""
        super().__init__(message + where, path=path, location=location)


class ResolutionError(LabError):
    """A refinement loop did not converge within its limits."""

    exit_code = 3


class RefinementNeededError(ResolutionError):
    """A grid is too coarse for the requested quantity."""


class SolverResolutionError(ResolutionError):
    """The band-edge solver could not certify the expected number of edges."""


class BudgetError(LabError):
    """A sample, time or measure budget was exceeded."""

    exit_code = 3

    def __init__(self, message: str, partial: Any = None, **details: Any):
        super().__init__(message, **details)
        self.partial = partial


class BudgetFailureError(BudgetError):
    """Power selection cannot bring the uncovered measure below its budget."""

    def __init__(self, message: str, best_residual: float, best_power: int):
        super().__init__(message, best_residual=best_residual, best_power=best_power)
        self.best_residual = best_residual
        self.best_power = best_power


class StageTooDeepError(BudgetError):
    """A stage word exceeds the word length cap."""


class SupportBudgetError(BudgetError):
    """Bump supports cannot be made disjoint within the requested total length."""
