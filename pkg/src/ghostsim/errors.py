"""Exception hierarchy shared across the package."""


class GhostsimError(Exception):
    """Base class for all package errors."""


class DomainError(GhostsimError, ValueError):
    """A parameter lies outside its physical domain."""


class SingularConfigurationError(DomainError):
    """The source sits exactly on the product-state point 4 Omega^2 sigma^2 = 1."""


class RegimeError(GhostsimError):
    """An approximation was requested outside the regime where it is valid."""


class ResolutionError(GhostsimError):
    """A numerical grid cannot resolve the requested configuration."""


class DegenerateInputError(GhostsimError, ValueError):
    pass


class GridError(GhostsimError, ValueError):
    pass


class ExtractionError(GhostsimError):
    """No interior primary maximum could be located in a pattern."""


class ConfigError(GhostsimError):
    """A run configuration failed to parse or validate."""

    def __init__(self, message, problems=None):
        super().__init__(message)
        self.problems = list(problems or [])
