"""Exception types shared across the package."""


class LatticeFrontsError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(LatticeFrontsError, ValueError):
    """A constructor or operation was given parameters outside its domain."""


class DomainError(LatticeFrontsError, ValueError):
    """A state vector or grid point lies outside the admissible region."""


class BracketError(LatticeFrontsError, RuntimeError):
    """A root or extremum search failed to bracket its target."""


class ConstructionError(LatticeFrontsError, RuntimeError):
    """A super/subsolution candidate failed its differential-inequality check."""


class NonConvergenceError(LatticeFrontsError, RuntimeError):
    """An iterative solve exhausted its iteration budget."""


class MonotonicityError(LatticeFrontsError, RuntimeError):
    """An order relation that the scheme must preserve was violated."""


class FrameShiftError(LatticeFrontsError, ValueError):
    """Moving-frame resampling left too little overlap with the profile window."""


class BlowUpError(LatticeFrontsError, RuntimeError):
    """Time integration produced a nonfinite value."""

    def __init__(self, message, node=None, t=None):
        super().__init__(message)
        self.node = node
        self.t = t


class ConfigError(LatticeFrontsError, ValueError):
    """An experiment configuration failed validation."""
