"""Exception hierarchy shared by all toolkit modules."""


class UrckitError(Exception):
    """Base class for every error raised by this package."""


class DomainError(UrckitError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NoSolutionError(DomainError):
    """A solver target cannot be met within its search bounds."""


class InfeasibleTierError(DomainError):
    """A service tier cannot be supported at the given system bandwidth."""


class ConfigError(UrckitError, ValueError):
    """A scenario config is invalid; the message names the offending key."""

    def __init__(self, key_path: str, message: str):
        self.key_path = key_path
        super().__init__(f"{key_path}: {message}")


class ReportFormatError(UrckitError):
    """The requested emission format does not fit the report payload."""
