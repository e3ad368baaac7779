"""Exception hierarchy shared by all modules."""


class IfsmapError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(IfsmapError, ValueError):
    """Invalid argument or configuration value."""


class OddGridSizeError(ValidationError):
    pass


class SpaceMismatchError(ValidationError):
    """A field was handed to an operation expecting the other space."""


class UnderresolvedGridError(ValidationError):
    pass


class UnderresolvedCapError(ValidationError):
    pass


class NumericalError(IfsmapError, ArithmeticError):
    """A numerical procedure failed to converge."""


class DivergentSeriesError(NumericalError):
    pass


class MaxIterationsError(NumericalError):
    pass
