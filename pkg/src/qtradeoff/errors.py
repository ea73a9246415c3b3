"""Exception types shared across the package."""

from __future__ import annotations


class TradeoffError(Exception):
    """Base class; ``code`` is a short machine-readable tag."""

    code = "ERROR"

    def __init__(self, message: str = "", code: str | None = None):
        if code is not None:
            self.code = code
        super().__init__(message or self.code)


class UnknownNodeError(TradeoffError, KeyError):
    code = "UNKNOWN_NODE"

    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return Exception.__str__(self)


class NoSuchArcError(TradeoffError):
    code = "NO_SUCH_ARC"


class PathExistsError(TradeoffError):
    code = "PATH_EXISTS"


class TooLargeError(TradeoffError):
    code = "TOO_LARGE"


class LengthMismatchError(TradeoffError, ValueError):
    code = "LENGTH_MISMATCH"


class InvalidPartitionError(TradeoffError, ValueError):
    code = "INVALID_PARTITION"


class IneligibleError(TradeoffError):
    code = "INELIGIBLE"


class GenerationFailure(TradeoffError):
    code = "GENERATION_FAILURE"


class InvalidNetworkError(TradeoffError, ValueError):
    """Raised when a network fails validation; carries the full report."""

    code = "INVALID_NETWORK"

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(lines or "invalid network")
