"""Exception types shared across the package."""


class AdallocError(Exception):
    """Base class for all package-specific errors."""


class NumericalInstabilityError(AdallocError):
    """A matrix factorization failed even after maximum jitter escalation."""


class InfeasibleAllocationError(AdallocError):
    """The daily cap cannot accommodate the minimum budget of every campaign."""


class InsufficientDataError(AdallocError):
    """Too few usable points to fit a model."""


class ConfigError(AdallocError):
    """An experiment configuration is malformed; the message names the field."""
