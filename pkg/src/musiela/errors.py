"""Exception types shared across the package."""


class MusielaError(Exception):
    """Base class for all package errors."""


class ConfigurationError(MusielaError, ValueError):
    """A parameter or configuration value violates its contract."""


class PreconditionError(MusielaError, ValueError):
    """An operation was called outside its domain of definition."""


class CorruptedStateError(MusielaError, FloatingPointError):
    """A curve or intermediate result contains NaN or infinite entries."""
