"""Exception hierarchy shared by every flowdecomp module."""
from typing import Any, Dict, Optional


class FlowDecompError(Exception):
    """Base class for all errors raised by flowdecomp."""


class ConfigurationError(FlowDecompError, ValueError):
    """Raised when an object is used without the configuration it needs."""


class DomainError(FlowDecompError, ValueError):
    """Raised when an argument lies outside the mathematical domain of an operation."""


class ContractError(FlowDecompError, ValueError):
    """Raised when a caller violates a documented precondition."""


class InstanceSizeError(FlowDecompError, ValueError):
    """Raised when an instance is too large for an exhaustive oracle."""


class ParseError(FlowDecompError, ValueError):
    """Raised when an input file cannot be parsed."""

    def __init__(self, message: str, path: Optional[str] = None,
                 line_number: Optional[int] = None):
        self.path = path
        self.line_number = line_number
        location = ""
        if path is not None:
            location = f"{path}:{line_number}: " if line_number else f"{path}: "
        super().__init__(f"{location}{message}")


class SolverError(FlowDecompError, RuntimeError):
    """Raised when a flow solver fails.

    Attributes:
        best: Best (certificate, lengths) pair found before the failure, if any.
    """

    def __init__(self, message: str, best: Any = None):
        super().__init__(message)
        self.best = best


class InfeasibleError(SolverError):
    """Raised when positive demand connects vertices in different components."""


class InvariantViolation(FlowDecompError, RuntimeError):
    """Raised when an internal invariant fails.

    Attributes:
        audit: Context of the recursion node where the failure happened.
    """

    def __init__(self, message: str, audit: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.audit = dict(audit or {})


class IntegrityError(FlowDecompError, RuntimeError):
    """Raised when a replayed audit does not match the recorded one."""
