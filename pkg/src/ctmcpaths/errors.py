"""Exception types shared across the package.

Each maps to a CLI exit code: validation errors exit 2, numerical
agreement failures exit 3, resource ceilings exit 4.
"""


class ChainValidationError(ValueError):
    """Malformed input: schema violation, bad rate, loop edge, out-of-range time."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class AgreementError(RuntimeError):
    """Independent computations disagree beyond their combined certificates."""


class ResourceLimitError(RuntimeError):
    """A configured ceiling was hit (path enumeration count, series order)."""
