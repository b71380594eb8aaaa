"""Exception hierarchy.

Each class carries the process exit code used by the command-line tool.
"""


class SeqportError(Exception):
    exit_code = 2


class ConfigError(SeqportError, ValueError):
    """Invalid grid, method parameters or infeasible budget settings."""

    exit_code = 1


class DataError(SeqportError, ValueError):
    """Malformed or inconsistent run data."""

    exit_code = 2


class ArchiveParseError(DataError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ResourceCapError(SeqportError, RuntimeError):
    """Refusal to start a computation whose size exceeds a hard cap."""

    exit_code = 3


class UnknownKeyError(SeqportError, KeyError):
    """Lookup of an algorithm, function or budget that is not in the data."""

    exit_code = 2

    def __str__(self):
        return str(self.args[0]) if self.args else ""
