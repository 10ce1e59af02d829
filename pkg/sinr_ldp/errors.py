class SinrLdpError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(SinrLdpError, ValueError):
    """An invalid or missing configuration value.

    `field` holds the dotted path of the offending field when it is known.
    """

    def __init__(self, message: str, field: str | None = None) -> None:
        self.field = field
        self.reason = message
        if field is not None and field not in message:
            message = f"{field}: {message}"
        super().__init__(message)


class DomainError(SinrLdpError, ValueError):
    """An argument outside the mathematical domain of an operation."""


class PartitionMismatchError(SinrLdpError, ValueError):
    """Two measures (or a measure and a tilt) live on different partitions."""


class InstanceTooLargeError(SinrLdpError, ValueError):
    """An exhaustive enumeration was requested beyond its hard size cap."""
