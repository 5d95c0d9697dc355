"""Exception types shared across the pipeline stages."""


class GazeDepthError(Exception):
    """Base class for all errors raised by this package."""


class StreamOrderError(GazeDepthError):
    """A sample arrived with a timestamp earlier than its predecessor."""


class BadDepthsError(GazeDepthError, ValueError):
    """Layer depths are not positive and strictly decreasing."""


class InsufficientDataError(GazeDepthError, ValueError):
    """Calibration needs at least two points at distinct true depths."""


class DegenerateFitError(GazeDepthError, ValueError):
    """Calibration produced a non-positive gain (wrong targets, bad data)."""


class TimeoutNoSettleError(GazeDepthError):
    """A calibration target never produced a settled filter reading."""


class TraceParseError(GazeDepthError, ValueError):
    """A trace/event file line could not be parsed.

    Carries the 1-based line number of the offending line.
    """

    def __init__(self, path: str, line_no: int, reason: str):
        self.path = path
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"{path}:{line_no}: {reason}")
