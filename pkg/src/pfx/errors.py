"""Exception hierarchy shared by every module of the package."""


class PfxError(Exception):
    """Base class for all errors raised by pfx."""


class DomainError(PfxError, ValueError):
    """A point lies outside the declared domain."""


class NegativeExactDistance(PfxError, ValueError):
    """D(x, y) - P(x, y) is negative beyond tolerance."""


class MismatchedBase(PfxError, ValueError):
    """Two perturbed metrics that should share D disagree on a sampled pair."""


class InvalidScale(PfxError, ValueError):
    pass


class NonPositiveArgument(PfxError, ValueError):
    """A gauge was evaluated at t <= 0."""


class NoEligiblePairs(PfxError, ValueError):
    pass


class OverflowGuard(PfxError, ArithmeticError):
    """Iterates left the domain while building the series estimate."""


class DomainExit(PfxError, RuntimeError):
    """A Picard iterate left the declared domain.

    The partial trace (stop_reason ``domain_exit``) is kept on ``trace``.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class InsufficientData(PfxError, ValueError):
    pass


class NonFiniteValue(PfxError, ArithmeticError):
    pass


class ShapeMismatch(PfxError, ValueError):
    pass


class ParseError(PfxError, ValueError):
    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f" (line {line}, column {column})"
        super().__init__(message + where)
        self.msg = message
        self.line = line
        self.column = column


class UnknownVariable(ParseError):
    pass


class EvalDomainError(PfxError, ValueError):
    """ln, sqrt or division evaluated outside its domain."""


class ValidationError(PfxError, ValueError):
    def __init__(self, field, message=None):
        super().__init__(message or f"invalid or missing field: {field}")
        self.field = field
