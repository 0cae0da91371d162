"""Exception hierarchy shared by all ssmrpe modules.

Every error raised on purpose derives from :class:`SsmrpeError` so callers
(and the CLI exit-code mapping) can distinguish our failures from bugs.
"""


class SsmrpeError(Exception):
    """Base class for all ssmrpe errors."""


class ConfigError(SsmrpeError, ValueError):
    """A parameter is outside its valid domain (even window, k >= n, ...)."""


class BoundsError(SsmrpeError, IndexError):
    """A pixel coordinate or flat index is outside the raster."""


class ShapeError(SsmrpeError, ValueError):
    """Array dimensions do not match what an operation requires."""


class ValidationError(SsmrpeError, ValueError):
    """Data content violates an invariant (non-finite values, label > c)."""


class FormatError(SsmrpeError, ValueError):
    """A file does not decode as the expected binary format."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class NumericalError(SsmrpeError, ArithmeticError):
    """A linear-algebra step failed (singular matrix, no convergence)."""
