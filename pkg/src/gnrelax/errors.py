"""Exception hierarchy."""


class GNRelaxError(Exception):
    """Base class for all package errors."""


class InvalidFieldError(GNRelaxError, ValueError):
    """Field values are malformed (wrong length, non-finite entries)."""


class CavitationError(GNRelaxError):
    """Water depth dropped below the configured floor ``h_star``.

    ``snapshot`` carries the offending state when raised from a time stepper.
    """

    def __init__(self, message, min_depth=None, time=None, snapshot=None):
        super().__init__(message)
        self.min_depth = min_depth
        self.time = time
        self.snapshot = snapshot


class NonHyperbolicError(GNRelaxError):
    """State lies outside the hyperbolicity region."""


class SolverError(GNRelaxError):
    """Iterative solver failed to reach its tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class DomainError(GNRelaxError, ValueError):
    """Input outside the mathematical domain of an operation."""


class ConfigError(GNRelaxError, ValueError):
    """Experiment configuration is invalid."""
