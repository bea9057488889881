"""Exception and warning types raised across the package."""


class EnsemblePCAError(Exception):
    """Base class for all package errors."""


class InvalidInput(EnsemblePCAError, ValueError):
    """Input fails validation (non-finite values, bad parameters, asymmetry)."""


class InsufficientSamples(InvalidInput):
    pass


class InvalidRank(InvalidInput):
    pass


class ShapeError(InvalidInput):
    pass


class InvalidBagSize(InvalidInput):
    pass


class DatasetIOError(EnsemblePCAError, OSError):
    """File could not be read or written."""


class ParseError(EnsemblePCAError, ValueError):
    """A CSV cell could not be parsed as a finite real number."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class DegenerateClusteringWarning(UserWarning):
    """Fewer distinct points than requested clusters."""


class PairingWarning(UserWarning):
    """K-means centers did not resolve into clean antipodal pairs."""
