"""Exception hierarchy shared by the I/O, codec and CLI layers.

The CLI maps each branch to its own exit code, so new errors should
subclass the most specific branch that applies.
"""


class HsicError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(HsicError, ValueError):
    """Inputs are well-formed but violate a documented precondition."""


class FormatError(HsicError, ValueError):
    """On-disk data does not match its declared layout."""


class FileSizeError(FormatError):
    pass


class BadMagicError(FormatError):
    pass


class VersionError(FormatError):
    pass


class PayloadLengthError(FormatError):
    pass


class TruncatedError(PayloadLengthError):
    pass
