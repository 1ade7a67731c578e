# core/errors.py
"""
Exception hierarchy for the toolkit.

Every error raised by library code derives from PivqError (and ValueError, so
callers that only expect ValueError keep working). The CLI maps PivqError to
exit code 1 in cli.utils.handle_data_error.
"""


class PivqError(ValueError):
    """Base class for all data and precondition errors."""


class DimensionMismatchError(PivqError):
    """Vectors, matrices or codebooks disagree on their dimensions."""


class ParseError(PivqError):
    """A file or byte stream does not follow its documented format."""


class PreconditionError(PivqError):
    """An operation was called outside its documented domain (e.g. K < L)."""


class CodeRangeError(PivqError):
    """A code index is negative or not smaller than the codebook size."""


class InstanceTooLargeError(PivqError):
    """An exhaustive oracle was asked for an instance above its size guard."""


class ConfigurationError(PivqError):
    """A configuration file or flag combination is invalid."""
