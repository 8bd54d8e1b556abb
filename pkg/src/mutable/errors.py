"""Exception hierarchy shared by the whole package."""


class MutableError(Exception):
    """Base class for all package errors."""


class InvalidInputError(MutableError):
    """An operation received arguments violating its preconditions."""


class InvalidStreamError(MutableError):
    """A sample or record stream failed validation."""

    def __init__(self, violations):
        self.violations = list(violations)
        summary = "; ".join(str(v) for v in self.violations[:5])
        if len(self.violations) > 5:
            summary += f"; ... ({len(self.violations)} total)"
        super().__init__(f"invalid stream: {summary}")


class TraceParseError(MutableError):
    """A trace file line could not be parsed."""

    def __init__(self, line_number, message):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class InsufficientCalibrationError(MutableError):
    """Not enough calibration data to produce a profile."""


class DegenerateTrainingError(MutableError):
    """A training stream carries no usable tap signal."""


class SingularCalibrationError(MutableError):
    """Projection correspondences are degenerate (collinear or rank-deficient)."""


class InvalidConfigError(MutableError):
    """A configuration value is out of range or inconsistent."""


class InvalidSpecError(MutableError):
    """A scenario spec is internally inconsistent."""


class EncodingOverflowError(MutableError):
    """A message field does not fit the fixed-size wire format."""
