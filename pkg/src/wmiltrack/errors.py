"""Exception hierarchy shared by every module."""


class TrackerError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(TrackerError, ValueError):
    pass


class BoundsError(TrackerError, IndexError):
    """A rectangle or sample box falls outside the image."""


class ConfigError(TrackerError, ValueError):
    """A configuration or synthetic-sequence spec violates a constraint.

    ``field`` names the offending key when one can be singled out.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class TrackingLostError(TrackerError):
    """No candidate window survived clipping; the target cannot be scored."""


class ImageReadError(TrackerError, OSError):
    """An image file is missing, unreadable or in an unsupported format."""

    def __init__(self, path, reason):
        super().__init__(f"cannot read image '{path}': {reason}")
        self.path = str(path)
