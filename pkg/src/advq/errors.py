"""Exception hierarchy shared by every module.

The CLI maps :class:`ConfigError` to exit code 2 and :class:`NumericalError`
(and subclasses) to exit code 3.
"""


class AdvqError(Exception):
    """Base class for package errors."""


class ConfigError(AdvqError, ValueError):
    """Invalid configuration or arguments."""


class DimensionError(ConfigError):
    """Operands act on different register sizes."""


class ResourceError(ConfigError):
    """Requested size exceeds the dense/test-scale guard."""


class NumericalError(AdvqError, RuntimeError):
    """A numerical procedure could not proceed."""


class StepSizeError(NumericalError):
    """The time step is too large for the first-order norm estimate."""


class FitError(NumericalError):
    """Initial-state fitting did not reach the acceptance threshold."""


class StagnationError(NumericalError):
    """No pool operator lowers the McLachlan distance."""

    def __init__(self, message: str, distance: float):
        super().__init__(message)
        self.distance = distance
