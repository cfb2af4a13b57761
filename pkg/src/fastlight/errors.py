"""Exception hierarchy shared by all fastlight modules."""


class FastlightError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(FastlightError):
    """A parameter, grid, or configuration violates a documented invariant."""


class ConfigError(FastlightError):
    """Config text could not be parsed; message carries the line number."""


class NumericalError(FastlightError):
    """A run produced non-finite values or broke norm conservation."""


class DivergingGroupVelocity(FastlightError):
    """The group-velocity denominator vanished (infinite group velocity)."""


class ThresholdNotReached(FastlightError):
    """No superfluorescence threshold crossing inside the simulated window."""
