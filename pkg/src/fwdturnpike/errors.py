"""Exception types shared across the package."""

from __future__ import annotations


class TurnpikeError(Exception):
    """Base class for all package errors."""


class ValidationError(TurnpikeError, ValueError):
    """Invalid input. ``field`` names the offending parameter when known."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)

    def with_prefix(self, prefix: str) -> "ValidationError":
        """Return a copy whose field path is prefixed, e.g. ``measure.points``."""
        field = f"{prefix}.{self.field}" if self.field else prefix
        msg = str(self)
        if self.field and msg.startswith(self.field + ": "):
            msg = msg[len(self.field) + 2:]
        return ValidationError(msg, field)


class NumericalError(TurnpikeError, ArithmeticError):
    """A computation could not be completed in floating point."""


class RangeError(NumericalError):
    """A value left the representable range even in log space."""


class NoConvergenceError(NumericalError):
    """An iterative solver failed to bracket or converge."""
