"""Exception types raised across the package."""


class SplitkitError(Exception):
    """Base class for all package errors."""


class ShapeError(SplitkitError, ValueError):
    """Array dimensions do not agree."""


class DomainError(SplitkitError, ValueError):
    """Input lies outside the domain of an operation (e.g. non-finite entries)."""


class ParameterError(SplitkitError, ValueError):
    """A numeric parameter violates its admissible range."""


class ConfigurationError(SplitkitError, ValueError):
    """A problem or solver is assembled in a way the solver cannot handle."""


class StepError(SplitkitError, RuntimeError):
    """An inner solve inside an iteration failed."""

    def __init__(self, message, iteration=None):
        if iteration is not None:
            message = f"iteration {iteration}: {message}"
        super().__init__(message)
        self.iteration = iteration
