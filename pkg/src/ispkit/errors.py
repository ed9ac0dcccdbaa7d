"""Exception types shared across the toolkit.

Both classes subclass ValueError so library users can catch them with the
usual Python idiom; the CLI maps any ISPKitError to exit code 3.
"""


class ISPKitError(ValueError):
    """Base class for all toolkit errors."""


class ValidationError(ISPKitError):
    """A value or combination of values violates a documented precondition."""


class FormatError(ISPKitError):
    """An on-disk artifact (tensor, manifest, IDX, PGM) is malformed."""
