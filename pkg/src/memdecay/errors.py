"""Exception hierarchy shared by the library and the command-line front end."""


class MemDecayError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(MemDecayError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class ConvergenceError(MemDecayError, ArithmeticError):
    """An iterative method or quadrature failed to reach its tolerance."""


class PrecisionError(MemDecayError, ArithmeticError):
    """The working precision cannot represent the requested result.

    Parameters
    ----------
    message : str
        Human readable diagnostic.
    needed_digits : int, optional
        Decimal digits that would be required for a meaningful result.
    """

    def __init__(self, message, needed_digits=None):
        super().__init__(message)
        self.needed_digits = needed_digits


class ResolutionError(MemDecayError, ValueError):
    """A grid is too coarse for the oscillation it has to resolve."""


class UnsupportedKindError(MemDecayError, ValueError):
    """The requested kernel or model variant is not handled by this operation."""


class ResolutionWarning(UserWarning):
    """The grid is coarser than recommended but the computation proceeds."""
