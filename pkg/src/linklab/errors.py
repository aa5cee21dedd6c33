"""Exception hierarchy shared by all linklab modules."""


class LinkLabError(Exception):
    """Base class for every error raised by linklab."""


class ConfigError(LinkLabError, ValueError):
    """Invalid configuration value or combination.

    ``key`` names the offending setting when one can be singled out.
    """

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class DimensionError(LinkLabError, ValueError):
    """Array shape or length does not match what the operation expects."""


class TruncationError(LinkLabError, IndexError):
    """A sample stream is too short for the requested operation."""


class DegenerateInputError(LinkLabError, ValueError):
    """Input carries no usable signal (e.g. zero power)."""
