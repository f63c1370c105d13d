"""Exception hierarchy shared across the package.

All errors inherit from :class:`RoughsegError`; the two main branches map
onto the CLI exit codes (parameter errors vs data/format errors). Both
also subclass ``ValueError`` so plain library users can catch the builtin.
"""


class RoughsegError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(RoughsegError, ValueError):
    """An argument or configuration value is out of its documented range."""


class DataError(RoughsegError, ValueError):
    """Input data violates a documented format or consistency requirement."""


class PpmFormatError(DataError):
    """A PPM byte stream could not be parsed; carries the failing offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset
