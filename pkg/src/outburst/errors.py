"""Exception types shared across the package."""


class OutburstError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(OutburstError, ValueError):
    """A distribution or configuration parameter is out of range."""


class ConfigError(OutburstError, ValueError):
    """A run configuration is structurally invalid (seeds, rates, bounds)."""


class UnboundedLawError(OutburstError, RuntimeError):
    """An operation requiring a bounded radius law was given an unbounded one."""
