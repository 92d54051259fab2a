"""Shared exception and warning types."""


class GhostsimError(Exception):
    """Base class for all package errors."""


class ParameterError(GhostsimError, ValueError):
    """A physical parameter is missing, non-finite, or out of range."""


class NumericError(GhostsimError, ArithmeticError):
    """A computation produced a non-finite intermediate or result."""


class ConvergenceError(GhostsimError):
    """Node doubling changed a quadrature result by more than the tolerance."""


class SamplingError(GhostsimError):
    """A grid is too coarse to resolve the structure it must represent."""


class GridMismatchError(GhostsimError):
    """Two gridded objects that must share geometry do not."""


class ConfigError(GhostsimError):
    """A configuration file or CLI argument could not be interpreted."""


class ParaxialWarning(UserWarning):
    """Transverse coordinates are large enough to strain the paraxial model."""


class SourceRegimeWarning(UserWarning):
    """Source parameters fall outside the regime the model was derived for."""


class ApertureSamplingWarning(UserWarning):
    """Aperture quadrature uses fewer nodes than the oscillation budget asks."""
