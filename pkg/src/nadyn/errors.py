"""Exception types raised across the package."""


class NadynError(Exception):
    """Base class for all package errors."""


class OutOfDomain(NadynError, ValueError):
    """A point lies outside the domain of a map."""


class UnsupportedComposition(NadynError, TypeError):
    """Two maps of incompatible kinds were composed."""


class UnsupportedSpace(NadynError, TypeError):
    """A detector was asked to run on a phase space it cannot handle."""


class SpaceMismatch(NadynError, ValueError):
    """Two sets or points belong to different phase spaces."""


class TransferFailed(NadynError, AssertionError):
    """A witness did not survive transfer from g to the family.

    The transfer is guaranteed by construction, so this signals a bug.
    """


class BudgetExceeded(NadynError, RuntimeError):
    """An exact computation would exceed its resource budget."""


class NotACover(NadynError, ValueError):
    """A collection of sets does not cover [0, 1]."""


class ParseError(NadynError, ValueError):
    """Malformed scenario or value text."""

    def __init__(self, message, position=None):
        self.position = position
        where = f" at {position}" if position is not None else ""
        super().__init__(f"{message}{where}")


class ValidationError(NadynError, ValueError):
    """A parsed object violates an invariant.

    ``invariant`` names the failed check, e.g. ``"range"`` or ``"continuity"``.
    """

    def __init__(self, invariant, message=""):
        self.invariant = invariant
        super().__init__(f"{invariant}: {message}" if message else invariant)
