"""Exception and warning types shared across the kit."""


class SlenderflowError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(SlenderflowError):
    """Invalid, unknown, or inconsistent configuration input."""


class GeometryError(SlenderflowError):
    """Invalid particle or domain geometry (overlap, out of range, ...)."""


class ConvergenceError(SlenderflowError):
    """An iterative solve failed to reach its tolerance."""


class StabilityError(SlenderflowError):
    """A runtime stability guard tripped (e.g. lattice Mach number)."""


class OutputError(SlenderflowError):
    """Failed to write a result artifact."""


class ValidityWarning(UserWarning):
    """A model was evaluated outside its documented validity window."""


class NearContactWarning(UserWarning):
    """Two particle surfaces came closer than the resolution limit."""


class ResolutionWarning(UserWarning):
    """A discretized feature is too coarse to be trustworthy."""
