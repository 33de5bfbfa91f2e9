"""Error hierarchy for the toolkit.

Every error carries the process exit code the management commands use:
2 for usage/config problems, 3 for malformed data files, 4 for analyses
that cannot produce a result.
"""


class LatencyToolkitError(Exception):
    exit_code = 4


class ConfigError(LatencyToolkitError):
    """Invalid configuration. `line` is the config line number when known."""
    exit_code = 2

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GeometryError(ConfigError):
    """Stimulus matrix does not fit the screen."""


class GridIndexError(LatencyToolkitError, IndexError):
    exit_code = 2


class RangeError(LatencyToolkitError, ValueError):
    exit_code = 2


class ParameterError(LatencyToolkitError, ValueError):
    exit_code = 2


class DataFormatError(LatencyToolkitError):
    exit_code = 3

    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class EmptyInputError(LatencyToolkitError, ValueError):
    exit_code = 4


class AnalysisError(LatencyToolkitError):
    exit_code = 4
