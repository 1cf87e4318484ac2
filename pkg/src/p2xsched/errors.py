"""Exception hierarchy shared by every layer of the package."""


class P2XError(Exception):
    """Base class for all package errors."""


class ValidationError(P2XError):
    """Input data or configuration failed validation."""


class UnitError(ValidationError):
    pass


class EmptyOverlapError(ValidationError):
    pass


class EmptySeriesError(ValidationError):
    pass


class FrameError(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, message, row=None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class CadenceError(ValidationError):
    pass


class DuplicateTimestampError(ValidationError):
    pass


class UnrepairableGapError(ValidationError):
    def __init__(self, message, first=None, last=None):
        super().__init__(message)
        self.first = first
        self.last = last


class LengthError(ValidationError):
    pass


class RangeError(ValidationError):
    pass


class CoverageError(ValidationError):
    pass


class CapacityError(ValidationError):
    """Requested hour count exceeds what a period can supply."""


class ConfigError(ValidationError):
    pass


class DegenerateInputError(P2XError):
    """Statistic undefined for the input (zero variance, constant regressor)."""


class DegenerateFitError(P2XError):
    """Least-squares design matrix is rank deficient."""


class StateError(P2XError):
    """Object used before it was fitted."""
