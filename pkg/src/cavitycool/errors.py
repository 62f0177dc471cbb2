"""Exception types shared across the package.

The CLI maps each class to a fixed exit code, so library code should
raise the most specific one that applies.
"""


class CavityCoolError(Exception):
    """Base class for all package errors."""


class ConfigError(CavityCoolError):
    """Bad configuration: unknown key, missing section, out-of-range value."""


class DataFormatError(CavityCoolError):
    """A data file (trace CSV, sidecar) does not match the documented format."""


class DomainError(CavityCoolError, ValueError):
    """An argument violates a documented precondition."""


class AnalysisError(CavityCoolError):
    """An estimator failed to converge or was handed unusable data."""
