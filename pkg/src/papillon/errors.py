"""Exception hierarchy shared by every papillon module."""

from __future__ import annotations


class PapillonError(Exception):
    """Base class for all library errors."""


class ParameterError(PapillonError, ValueError):
    """Invalid family parameters, node labels or strategy combination."""


class SizeError(ParameterError):
    """Requested topology would exceed the configured node cap."""


class ShortOnly(ParameterError):
    """Distance too small for a digit decomposition; route with short links."""


class LevelMismatch(ParameterError):
    """Endpoints of a balanced decomposition are not on the same level."""


class RoutingError(PapillonError):
    """A route exceeded its hop cap or stepped off the topology."""


class InvariantViolation(PapillonError):
    """A structural invariant or a proven bound failed during analysis."""


class BudgetExceeded(PapillonError):
    """Exhaustive enumeration would exceed the work budget."""
