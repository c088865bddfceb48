"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class BoGError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(BoGError, ValueError):
    """Input violates an operation's preconditions (CLI exit code 1)."""


class ConfigError(InvalidInputError):
    """A configuration value is out of range or inconsistent."""


class FormatError(BoGError):
    """A binary or text file is corrupt or has an unexpected layout (CLI exit code 2)."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class BoGWarning(UserWarning):
    """Recoverable condition that is recorded but does not stop processing."""
