"""
Exception hierarchy for Virtual Twins Tools.

Every error raised deliberately by the package derives from VirtualTwinsError and
carries the offending context as attributes, so callers (the CLI in particular)
can map failures to exit codes and readable messages.
"""

from typing import Any, Optional


class VirtualTwinsError(Exception):
    """
    Base exception for all Virtual Twins Tools errors.

    Catch this to handle any package-specific failure with a single except clause.
    """
    pass


class DataError(VirtualTwinsError):
    """Base exception for problems with input data."""
    pass


class SchemaError(DataError):
    """
    Raised when the columns of an input do not match the expected schema.

    Attributes:
        column (str): The missing or duplicated column name (if available)
    """

    def __init__(self, message: str, column: Optional[str] = None):
        super().__init__(message)
        self.column = column


class ValidationError(DataError):
    """
    Raised when data values fail validation.

    Examples:
    - Non-numeric or missing cells
    - Treatment values outside {0, 1}
    - Binary covariate values outside {0, 1}
    - Row counts of X, T and Y that disagree

    Attributes:
        field (str): The field that failed validation (if available)
        value: The invalid value (if available)
    """

    def __init__(self, message: str, field: Optional[str] = None, value: Any = None):
        super().__init__(message)
        self.field = field
        self.value = value


class ArmError(DataError):
    """
    Raised when a treatment arm has no rows.

    Attributes:
        arm (int): The empty arm (0 = control, 1 = treated)
    """

    def __init__(self, message: str, arm: Optional[int] = None):
        super().__init__(message)
        self.arm = arm


class SpecError(VirtualTwinsError):
    """
    Raised when a learner, step-2 or scenario specification is invalid.

    Attributes:
        field (str): The offending spec field
        value: The rejected value
    """

    def __init__(self, message: str, field: Optional[str] = None, value: Any = None):
        super().__init__(message)
        self.field = field
        self.value = value


class ConfigError(VirtualTwinsError):
    """
    Raised when a benchmark or CLI configuration cannot be used.

    Attributes:
        key (str): The configuration key at fault (if available)
        path (str): The configuration file (if available)
    """

    def __init__(self, message: str, key: Optional[str] = None, path: Optional[str] = None):
        super().__init__(message)
        self.key = key
        self.path = path


class FitError(VirtualTwinsError):
    """
    Raised when a model cannot be fitted.

    Attributes:
        learner (str): Name of the learner that failed
        fold (int): Cross-validation fold index when the failure happened inside CV
    """

    def __init__(self, message: str, learner: Optional[str] = None, fold: Optional[int] = None):
        super().__init__(message)
        self.learner = learner
        self.fold = fold


class ColumnMismatchError(VirtualTwinsError):
    """
    Raised when prediction input does not have the training column layout.

    Attributes:
        expected (int): Number of columns seen at fit time
        got (int): Number of columns supplied
    """

    def __init__(self, message: str, expected: Optional[int] = None, got: Optional[int] = None):
        super().__init__(message)
        self.expected = expected
        self.got = got


class CalibrationError(VirtualTwinsError):
    """
    Raised when a permutation repetition of the penalty calibration fails.

    Attributes:
        repetition (int): 0-based index of the failing repetition
    """

    def __init__(self, message: str, repetition: Optional[int] = None):
        super().__init__(message)
        self.repetition = repetition


class SamplingError(VirtualTwinsError):
    """
    Raised when the selection-bias sampler cannot fill its quotas.

    Attributes:
        quota (int): Rows requested from a half
        available (int): Rows available in that half
    """

    def __init__(self, message: str, quota: Optional[int] = None, available: Optional[int] = None):
        super().__init__(message)
        self.quota = quota
        self.available = available


class OutputError(VirtualTwinsError):
    """
    Raised when results cannot be written.

    Attributes:
        path (str): The file or directory that could not be written
    """

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(message)
        self.path = path
