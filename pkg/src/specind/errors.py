"""Exception hierarchy shared across modules."""


class SpecIndError(Exception):
    """Base class for all library errors."""


class ParseError(SpecIndError):
    pass


class DisconnectedGraph(SpecIndError):
    pass


class SelfLoop(SpecIndError):
    pass


class DuplicateEdge(SpecIndError):
    pass


class InvalidParams(SpecIndError):
    pass


class ConvergenceFailure(SpecIndError):
    pass


class BudgetExceeded(SpecIndError):
    pass


class OutOfConvergenceRadius(SpecIndError):
    pass


class SingularMatrix(SpecIndError):
    pass


class PreconditionViolated(SpecIndError):
    pass


class DomainError(SpecIndError):
    pass


class EmptySupport(SpecIndError):
    pass


class InfeasibleBoundary(SpecIndError):
    pass


class DimensionMismatch(SpecIndError):
    pass


class FixedPointNotBracketed(SpecIndError):
    pass
