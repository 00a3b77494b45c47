from pathlib import Path

import click


class UnderlayException(Exception):
    """Base Exception for any underlay simulator faults."""


class InvalidParameterError(UnderlayException, ValueError):
    """A numeric model parameter is outside of its valid range."""


class EmptyCandidateSetError(UnderlayException):
    def __init__(self, operation: str):
        super().__init__(f"No denied D2D pairs left to select from in '{operation}'")


class ScaleGuardError(UnderlayException):
    def __init__(self, n_cues: int, n_d2d: int, max_cues: int, max_d2d: int):
        super().__init__(
            f"Exhaustive search limited to N <= {max_cues} and M <= {max_d2d}, "
            f"got N={n_cues}, M={n_d2d} ({(n_cues + 1) ** n_d2d} states)"
        )


# NOTE: Subclass `click.UsageError` here so bad configs in CLI don't show stack trace
class ConfigurationError(UnderlayException, click.UsageError):
    """Exception for invalid experiment configurations (file or command line)."""


class ResultsWriteError(UnderlayException):
    def __init__(self, path: Path, error: Exception):
        super().__init__(f"Could not write results to '{path}': {error}")
        self.path = path


# TODO: `ExceptionGroup` added in Python 3.11
class StartupFailure(UnderlayException):
    def __init__(self, *exceptions: Exception | str):
        if len(exceptions) == 1 and isinstance(exceptions[0], str):
            super().__init__(exceptions[0])
        elif error_str := "\n".join(str(e) for e in exceptions):
            super().__init__(f"Startup failure(s):\n{error_str}")
        else:
            super().__init__("Startup failure(s) detected. See logs for details.")
