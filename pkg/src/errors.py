"""
Exception hierarchy shared by the library, the CLI and the scripts.
Each class carries the process exit code the CLI reports for it.
"""


class SDCORError(Exception):
    """Base error. Anything not classified below is an internal failure."""
    exit_code = 4


class InputError(SDCORError, ValueError):
    """Unreadable or malformed input, bad arguments, dimension mismatches."""
    exit_code = 2


class DataFormatError(InputError):
    """A dataset cell or row could not be parsed."""

    def __init__(self, message: str, row: int = None, column: int = None):
        super().__init__(message)
        self.row = row
        self.column = column


class InfeasibleError(SDCORError):
    """No feasible tuning, sampling or generation outcome exists for the inputs."""
    exit_code = 3


class InvariantError(SDCORError):
    """A run-time invariant check failed."""
    exit_code = 4
