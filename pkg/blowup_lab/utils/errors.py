"""
Error taxonomy for the blow-up laboratory.
Every failure raised by the package carries a stable, machine-readable code.
"""

from typing import Optional


class BlowupLabError(Exception):
    """
    Base class for all errors raised by blowup_lab.
    """

    code = "error"

    def __init__(self, message: str, *, details: Optional[dict] = None):
        """
        Initialize the error.

        Args:
            message: Human-readable description.
            details: Optional structured context (values, locations).
        """
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def __str__(self) -> str:
        return f"[{self.code}] {self.message}"


class InvalidArgumentError(BlowupLabError, ValueError):
    code = "invalid-argument"


class UnsupportedMomentError(BlowupLabError, ValueError):
    code = "unsupported-moment"


class OutOfDomainError(BlowupLabError, ValueError):
    code = "out-of-domain"


class InvalidProblemError(BlowupLabError, ValueError):
    code = "invalid-problem"


class InvalidTimeError(BlowupLabError, ValueError):
    code = "invalid-time"


class NanStateError(BlowupLabError, ArithmeticError):
    code = "nan-state"


class LikelyGlobalSolutionError(BlowupLabError, RuntimeError):
    """
    The run ended without blowing up; the amplitude is probably below the
    blow-up threshold.
    """

    code = "likely-global-solution"

    def __init__(self, message: str, trajectory=None, **kwargs):
        super().__init__(message, **kwargs)
        self.trajectory = trajectory


class NotBlowingUpError(BlowupLabError, RuntimeError):
    code = "not-blowing-up"


class InsufficientDataError(BlowupLabError, RuntimeError):
    code = "insufficient-data"


class AmbiguousLocationError(BlowupLabError, RuntimeError):
    code = "ambiguous-location"


class EmptySweepError(BlowupLabError, RuntimeError):
    code = "empty-sweep"


class Theorem3InapplicableError(BlowupLabError, ValueError):
    code = "theorem3_inapplicable"


class ConfigError(BlowupLabError, ValueError):
    """
    Raised for malformed configuration text.
    """

    code = "config-error"

    def __init__(self, message: str, line: Optional[int] = None, key: Optional[str] = None):
        """
        Initialize the configuration error.

        Args:
            message: Description of the problem.
            line: 1-based line number in the config text, when known.
            key: The offending key, when known.
        """
        location = f"line {line}: " if line is not None else ""
        super().__init__(f"{location}{message}", details={"line": line, "key": key})
        self.line = line
        self.key = key
