"""Exception types raised by the package."""


class HeatChannelError(Exception):
    """Base class for all package errors."""


class NotSummable(HeatChannelError, ValueError):
    """The coefficient tail cannot be certified below the requested tolerance."""


class InvalidParams(HeatChannelError, ValueError):
    pass


class ModeMismatch(HeatChannelError, ValueError):
    """Recursive history requested for a profile that is not geometric."""


class DegenerateProfile(HeatChannelError, ValueError):
    """A rate formula diverges (e.g. subsampled coefficient sum equal to zero).

    ``value`` carries the limiting value (``inf``) so callers can report it.
    """

    def __init__(self, message, value=float("inf")):
        super().__init__(message)
        self.value = value


class PremiseViolated(HeatChannelError, ValueError):
    pass


class DimensionMismatch(HeatChannelError, ValueError):
    pass


class SingularCovariance(HeatChannelError, ValueError):
    pass


class ConfigInconsistent(HeatChannelError, ValueError):
    pass


class TooManyMessages(HeatChannelError, ValueError):
    pass


class BadMessage(HeatChannelError, IndexError):
    pass


class ConfigError(HeatChannelError, ValueError):
    """Malformed experiment configuration; ``field`` names the offending key."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field
