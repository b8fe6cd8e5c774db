"""Exception hierarchy shared by every module."""


class WeaverError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(WeaverError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ResourceError(WeaverError):
    """A request would exceed a configured size cap (vector length, observation budget)."""


class ValidationError(WeaverError, ValueError):
    """A component specification or configuration is malformed or inconsistent."""
