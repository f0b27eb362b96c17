"""Exception hierarchy shared by all modules."""


class BnsdError(Exception):
    """Base class for every error raised by this package."""


class NotHermitian(BnsdError, ValueError):
    pass


class DimensionMismatch(BnsdError, ValueError):
    pass


class NotNormalized(BnsdError, ValueError):
    pass


class UndefinedPhase(BnsdError, ValueError):
    """Relative phase requested while one of the two corner amplitudes is zero."""


class InvalidState(BnsdError, ValueError):
    pass


class InvalidParameters(BnsdError, ValueError):
    pass


class UnknownClass(BnsdError, KeyError):
    pass


class UnknownOperator(BnsdError, KeyError):
    pass


class InvalidFamily(BnsdError, ValueError):
    pass


class NoClosedForm(BnsdError, ValueError):
    pass


class EmptyGrid(BnsdError, ValueError):
    pass


class NumericalFailure(BnsdError, ArithmeticError):
    """An internal consistency check failed; indicates a bug, not bad input."""
