"""
bootperc exception classes

Every error raised on purpose by the library derives from ``BootpercError``.
The ``exit_code`` class attribute is what the CLI returns for it.
"""

from typing import Optional, Sequence


class BootpercError(Exception):
    """Base exception for all bootperc errors."""

    exit_code = 2


# ---------------------------------------------------------------------------
# Usage errors (exit 1)
# ---------------------------------------------------------------------------

class UsageError(BootpercError):
    """Raised when a command line or config file cannot be understood."""

    exit_code = 1


class FamilyLiteralError(UsageError):
    """Raised when a family literal such as ``N[1,2,4]r=6`` is malformed."""

    def __init__(self, message: str, literal: Optional[str] = None):
        self.literal = literal
        super().__init__(message)


# ---------------------------------------------------------------------------
# Precondition errors (exit 2)
# ---------------------------------------------------------------------------

class InvalidSpecError(BootpercError):
    """Raised for unsorted or non-positive radii, or an out-of-range threshold."""


class InvalidDirectionError(BootpercError):
    """Raised when a direction is the zero vector or has the wrong dimension."""


class InvalidParameterError(BootpercError):
    """Raised when a numeric parameter is outside its admissible range."""

    def __init__(self, message: str, name: Optional[str] = None, value: object = None):
        self.name = name
        self.value = value
        super().__init__(message)


class DimensionMismatchError(BootpercError):
    """Raised when a family and a box disagree on dimension."""

    def __init__(self, message: str, expected: int = None, actual: int = None):
        self.expected = expected
        self.actual = actual
        super().__init__(message)


class OutOfBoundsError(BootpercError):
    """Raised when a sub-block or droplet does not fit inside its box."""


class NotApplicableError(BootpercError):
    """Raised when an operation is asked of a family outside its class."""

    def __init__(self, message: str, criticality: Optional[str] = None):
        self.criticality = criticality
        super().__init__(message)


class DisconnectedProjectionError(BootpercError):
    """Raised when a beam projection is not connected in the 2D family graph."""

    def __init__(self, message: str, components: int = None):
        self.components = components
        super().__init__(message)


class WindowTooSmallError(BootpercError):
    """Raised when too many cluster samples touch the window boundary."""

    def __init__(self, message: str, censored_fraction: float = None):
        self.censored_fraction = censored_fraction
        super().__init__(message)


class BoundExceededError(BootpercError):
    """Raised when an exhaustive beam count exceeds its combinatorial bound."""

    def __init__(self, message: str, count: int = None, bound: float = None):
        self.count = count
        self.bound = bound
        super().__init__(message)


class InconsistentTableError(BootpercError):
    """Raised when two independent computations of a table entry disagree."""

    def __init__(self, message: str, entries: Sequence[object] = ()):
        self.entries = tuple(entries)
        super().__init__(message)


# ---------------------------------------------------------------------------
# Resource errors (exit 3)
# ---------------------------------------------------------------------------

class ResourceLimitError(BootpercError):
    """Raised when a box or its neighbour table exceeds the configured budget."""

    exit_code = 3

    def __init__(self, message: str, requested: int = None, limit: int = None):
        self.requested = requested
        self.limit = limit
        super().__init__(message)
