"""Exception hierarchy shared across the package."""


class FracPlaqueError(Exception):
    """Base class for all package errors."""


class DomainError(FracPlaqueError, ValueError):
    """An argument lies outside the domain of an operation."""


class UnsupportedDomainError(DomainError):
    """The requested parameter regime is not covered by any implemented algorithm."""


class GeometryError(FracPlaqueError, ValueError):
    """The channel geometry is degenerate (e.g. the plaque closes the channel)."""


class TransferError(FracPlaqueError):
    """A point could not be located in the source mesh during field transfer."""


class StepFailureError(FracPlaqueError, RuntimeError):
    """A time step failed; carries the failing step index."""

    def __init__(self, message, step=None, time=None):
        super().__init__(message)
        self.step = step
        self.time = time


class NonConvergenceError(FracPlaqueError, RuntimeError):
    """Periodic-orbit iteration exhausted its cycle budget."""

    def __init__(self, message, residuals=(), macro_index=None):
        super().__init__(message)
        self.residuals = list(residuals)
        self.macro_index = macro_index


class ConfigError(FracPlaqueError, ValueError):
    """Invalid simulation configuration; names the offending field."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
