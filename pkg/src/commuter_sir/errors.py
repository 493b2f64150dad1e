"""Exception hierarchy shared by the library and the command line."""


class CommuterSIRError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(CommuterSIRError, ValueError):
    """A parameter, state or input file violates a documented invariant."""


class HypothesisError(ValidationError):
    """The inputs do not satisfy the hypotheses an analysis result relies on."""


class ConvergenceError(CommuterSIRError, ArithmeticError):
    """A numerical procedure failed to converge or lost accuracy."""


class ConsistencyError(CommuterSIRError, ArithmeticError):
    """A numerical result contradicts a proven structural property."""
