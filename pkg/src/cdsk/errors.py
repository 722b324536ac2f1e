"""Exception types shared across the package.

Everything raised on purpose derives from CdskError so callers (and the
CLI) can distinguish expected failures from genuine bugs.
"""


class CdskError(Exception):
    """Base class for all expected failures."""


class ParseError(CdskError):
    """Malformed input file (CSV cell, truncated JSON, ...)."""


class ValidationError(CdskError):
    """Value, shape, or domain constraint violated."""


class ConfigError(CdskError):
    """Configuration value outside its legal range."""


class DegenerateDataError(CdskError):
    """Data admits no meaningful answer (identical rows, zero degree, ...)."""


class NumericError(CdskError):
    """Underlying numerical routine failed to converge."""
