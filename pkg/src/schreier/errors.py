"""Exception taxonomy.

Two flavors matter to the command line: bad input (exit code 2) and a
certified negative outcome (exit code 1).  A negative outcome is not a bug;
it is a result the run can stand behind (a search exhausted its window, a
validation failed with an exact margin).  Exceptions of the second kind may
carry a payload object describing the evidence.
"""

from __future__ import annotations


class Error(Exception):
    """Base class for all package errors."""


class InputError(Error):
    """Malformed or out-of-contract input; CLI exit code 2."""


class NegativeOutcome(Error):
    """Certified negative result; CLI exit code 1."""

    def __init__(self, message: str, payload=None):
        super().__init__(message)
        self.payload = payload


# -- seqvec -----------------------------------------------------------------

class IndexOutOfRange(InputError):
    pass


class SupportOverflow(InputError):
    pass


class LengthMismatch(InputError):
    pass


# -- norms ------------------------------------------------------------------

class QuotientUnavailable(InputError):
    pass


class CapExceeded(InputError):
    pass


class NonPolyhedral(InputError):
    pass


class SignCapExceeded(CapExceeded):
    pass


class SubsetCapExceeded(CapExceeded):
    pass


# -- schedule ---------------------------------------------------------------

class ZeroDenominator(InputError):
    pass


class TailDescriptorMissing(InputError):
    pass


# -- quotient ---------------------------------------------------------------

class NotInRange(InputError):
    pass


# -- blocking ---------------------------------------------------------------

class NotFoundWithinTruncation(NegativeOutcome):
    pass


class InsufficientDecay(NegativeOutcome):
    pass


class SceneIncomplete(InputError):
    pass


# -- flatten ----------------------------------------------------------------

class EmptyWindow(InputError):
    pass


class PlanIncompatible(InputError):
    pass


class WindowExhausted(NegativeOutcome):
    """No small average exists within the searched windows; carries the
    minimal observed average as a certificate."""


# -- pipeline ---------------------------------------------------------------

class FlattenFailed(NegativeOutcome):
    pass


class TooFewIndices(InputError):
    pass


class NotC0Like(NegativeOutcome):
    pass


class EmptyF(InputError):
    pass


class TargetUnreachable(NegativeOutcome):
    pass


class TraceIncomplete(InputError):
    pass


class InsufficientVectors(InputError):
    pass


class BudgetExhausted(NegativeOutcome):
    """Search budget ran out before the target; carries the best family seen."""


# -- cli / documents ----------------------------------------------------------

class ParseError(InputError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
