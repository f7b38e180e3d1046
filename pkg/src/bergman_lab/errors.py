"""Exception hierarchy shared by all modules."""


class BergmanLabError(Exception):
    """Base class for every error raised by the package."""


class DomainError(BergmanLabError, ValueError):
    """A point lies outside the chart (or on the pole) where it was requested."""


class NumericsError(BergmanLabError, ArithmeticError):
    """A numerical result violated an internal consistency tolerance."""


class PositivityError(NumericsError):
    """Curvature is not positive where positivity is required."""


class ResolutionError(BergmanLabError, ValueError):
    """Quadrature resolution is too low for the requested computation."""

    def __init__(self, message, suggested=None):
        super().__init__(message)
        self.suggested = suggested


class RankError(NumericsError):
    """Gram matrix is numerically rank deficient.

    ``directions`` holds the eigenvectors that would have been discarded.
    """

    def __init__(self, message, directions=None, eigenvalues=None):
        super().__init__(message)
        self.directions = directions
        self.eigenvalues = eigenvalues


class IllConditionedError(NumericsError):
    pass


class InsufficientDataError(BergmanLabError, ValueError):
    pass


class FitError(NumericsError):
    pass


class PreconditionError(BergmanLabError, ValueError):
    pass


class BasePointError(NumericsError):
    """All sections vanish at a point, so the Kodaira map is undefined there."""


class GeneratorError(BergmanLabError, RuntimeError):
    pass
