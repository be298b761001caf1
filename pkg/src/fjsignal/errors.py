"""Exception hierarchy.

Errors fall in three groups that the CLI maps onto exit codes:
input/parse problems, invalid data, and method preconditions.
"""


class FJError(Exception):
    """Base class for all package errors."""


class InputError(FJError):
    """Unreadable or malformed input file (exit code 1)."""


class ValidationError(FJError):
    """Data that parses but violates a model invariant (exit code 2)."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class DimensionMismatch(ValidationError):
    pass


class InvalidScheme(ValidationError):
    pass


class PreconditionError(FJError):
    """A solution method was called on an instance it does not handle (exit code 3)."""


class WrongObjectiveKind(PreconditionError):
    pass


class WrongStateCount(PreconditionError):
    pass


class NotMonotone(PreconditionError):
    pass


class NotBitonic(PreconditionError):
    pass


class NoConsensus(PreconditionError):
    pass


class TooLarge(PreconditionError):
    pass


class SingularMatrix(FJError):
    pass


class ZeroMassSignal(FJError):
    pass


class NotConverged(FJError):
    def __init__(self, message, last_iterate=None, rounds=0):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.rounds = rounds


class NumericalFailure(FJError):
    pass


class InfeasibleGrid(FJError):
    pass
