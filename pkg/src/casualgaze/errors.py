"""Exception types shared across the package."""


class CasualGazeError(Exception):
    """Base class for all casualgaze errors."""


class ZeroDirection(CasualGazeError):
    """A direction vector with zero length where a direction is required."""


class OutOfRange(CasualGazeError):
    """An angle or value outside its documented domain."""


class NonPositiveDistance(CasualGazeError):
    """Eye-to-target distance must be strictly positive."""


class InsufficientData(CasualGazeError):
    """Not enough samples to fit the requested model."""


class DegenerateDesign(CasualGazeError):
    """Least-squares design matrix is rank deficient."""


class EmptyBuffer(CasualGazeError):
    """Recognizer asked for a prediction with no samples buffered."""


class NonMonotonicTimestamp(CasualGazeError):
    """A gaze sample arrived with a timestamp not newer than the buffer head."""


class LengthMismatch(CasualGazeError):
    """Prediction stream and trial samples are not aligned one-to-one."""


class EmptyInput(CasualGazeError):
    """Aggregation over an empty collection."""


class ParseError(CasualGazeError):
    """A file could not be parsed at all."""


class SchemaVersionMismatch(CasualGazeError):
    """File carries a schema tag this version does not understand."""


class ValidationError(CasualGazeError):
    """Parsed content violates a structural invariant."""


class InvalidProfile(CasualGazeError):
    """Trajectory profile parameters outside their valid ranges."""
