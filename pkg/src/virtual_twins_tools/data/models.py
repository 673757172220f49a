"""
Data models for two-arm trial data.

This module defines the containers shared by every other part of the package:
column metadata, the immutable Dataset (covariates, treatment, outcome), and the
standardization parameters used by penalized learners.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import ArmError, ValidationError

logger = logging.getLogger(__name__)


class ColumnKind(str, Enum):
    """Covariate kind. Binary columns are coded 0/1."""

    CONTINUOUS = "continuous"
    BINARY = "binary"


@dataclass(frozen=True)
class ColumnMeta:
    """
    Metadata for a single covariate column.

    Attributes:
        name: Column name as it appears in CSV headers and reports
        kind: Continuous or Binary
        index: 0-based position of the column in the covariate matrix

    Example:
        >>> ColumnMeta(name="age", kind=ColumnKind.CONTINUOUS, index=0)
        ColumnMeta(name='age', kind=<ColumnKind.CONTINUOUS: 'continuous'>, index=0)
    """

    name: str
    kind: ColumnKind
    index: int


def _as_readonly(values, dtype) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Dataset:
    """
    Covariates, treatment indicator and continuous outcome of n subjects.

    Arrays are copied and made read-only on construction, so a Dataset can be
    shared freely between worker processes and threads.

    Attributes:
        columns: Per-column metadata, one entry per covariate
        X: n×p covariate matrix (binary columns coded 0/1)
        T: Length-n treatment indicator in {0, 1}
        Y: Length-n outcome vector

    Example:
        >>> d = Dataset.from_arrays([[0.5], [1.5]], [1, 0], [2.0, 1.0], names=["x1"])
        >>> d.n, d.p
        (2, 1)
    """

    columns: Tuple[ColumnMeta, ...]
    X: np.ndarray
    T: np.ndarray
    Y: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "columns", tuple(self.columns))
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        T = np.asarray(self.T, dtype=float).ravel()
        if not np.all((T == 0) | (T == 1)):
            bad = T[(T != 0) & (T != 1)][0]
            raise ValidationError("treatment not binary", field="T", value=float(bad))
        object.__setattr__(self, "X", _as_readonly(X, float))
        object.__setattr__(self, "T", _as_readonly(T, np.int64))
        object.__setattr__(self, "Y", _as_readonly(np.asarray(self.Y, dtype=float).ravel(), float))
        self.validate()

    @classmethod
    def from_arrays(
        cls,
        X,
        T,
        Y,
        names: Optional[Sequence[str]] = None,
        kinds: Optional[Sequence[ColumnKind]] = None,
    ) -> "Dataset":
        """
        Build a Dataset from plain arrays.

        Args:
            X: n×p covariates (a 1-D input is treated as a single column)
            T: Treatment indicator
            Y: Outcome
            names: Column names (default x1..xp)
            kinds: Column kinds (default all Continuous)

        Returns:
            Dataset: Validated dataset
        """
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        p = X.shape[1]
        names = list(names) if names is not None else [f"x{j + 1}" for j in range(p)]
        kinds = list(kinds) if kinds is not None else [ColumnKind.CONTINUOUS] * p
        if len(names) != p or len(kinds) != p:
            raise ValidationError(
                f"Expected {p} column names and kinds, got {len(names)} and {len(kinds)}",
                field="columns",
                value=len(names),
            )
        columns = tuple(ColumnMeta(name=n, kind=ColumnKind(k), index=j) for j, (n, k) in enumerate(zip(names, kinds)))
        return cls(columns=columns, X=X, T=np.asarray(T), Y=np.asarray(Y, dtype=float))

    def validate(self) -> None:
        """
        Validate shapes, column metadata and value domains.

        Raises:
            ValidationError: If any invariant is violated
        """
        n, p = self.X.shape
        if self.T.shape[0] != n or self.Y.shape[0] != n:
            raise ValidationError(
                f"Row counts differ: X has {n}, T has {self.T.shape[0]}, Y has {self.Y.shape[0]}",
                field="rows",
                value=(n, self.T.shape[0], self.Y.shape[0]),
            )
        if len(self.columns) != p:
            raise ValidationError(f"Expected {p} column entries, got {len(self.columns)}", field="columns")

        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ValidationError("Column names must be unique", field="columns", value=names)
        for j, column in enumerate(self.columns):
            if column.index != j:
                raise ValidationError(f"Column {column.name} has index {column.index}, expected {j}", field="index")

        if not np.all(np.isfinite(self.X)):
            raise ValidationError("Covariates contain missing or non-finite values", field="X")
        if not np.all(np.isfinite(self.Y)):
            raise ValidationError("Outcome contains missing or non-finite values", field="Y")
        if not np.all((self.T == 0) | (self.T == 1)):
            bad = self.T[(self.T != 0) & (self.T != 1)][0]
            raise ValidationError("treatment not binary", field="T", value=int(bad))

        for column in self.columns:
            if column.kind is ColumnKind.BINARY:
                values = self.X[:, column.index]
                if not np.all((values == 0) | (values == 1)):
                    raise ValidationError(
                        f"Binary column {column.name} has values outside {{0, 1}}",
                        field=column.name,
                    )

    @property
    def n(self) -> int:
        """Number of subjects."""
        return int(self.X.shape[0])

    @property
    def p(self) -> int:
        """Number of covariates."""
        return int(self.X.shape[1])

    @property
    def feature_names(self) -> List[str]:
        return [c.name for c in self.columns]

    @property
    def binary_mask(self) -> np.ndarray:
        """Boolean mask of Binary columns."""
        return np.array([c.kind is ColumnKind.BINARY for c in self.columns], dtype=bool)

    def subset(self, rows) -> "Dataset":
        """
        Return the Dataset restricted to the given rows (indices or boolean mask).

        Row order follows ``rows``.
        """
        return Dataset(columns=self.columns, X=self.X[rows], T=self.T[rows], Y=self.Y[rows])

    def with_treatment(self, T) -> "Dataset":
        """Return a copy of the Dataset with a replaced treatment vector."""
        return Dataset(columns=self.columns, X=self.X, T=np.asarray(T), Y=self.Y)


@dataclass(frozen=True)
class StandardizationParams:
    """
    Per-column centering and scaling learned from a fitting matrix.

    Attributes:
        means: Length-p column means (0 for Binary columns)
        scales: Length-p population standard deviations (1 for Binary and constant columns)
        constant: Length-p flags marking constant columns
    """

    means: np.ndarray
    scales: np.ndarray
    constant: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))

    def __post_init__(self) -> None:
        means = _as_readonly(self.means, float)
        scales = _as_readonly(self.scales, float)
        constant = np.asarray(self.constant, dtype=bool)
        if constant.size == 0:
            constant = np.zeros(means.shape[0], dtype=bool)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "scales", scales)
        object.__setattr__(self, "constant", _as_readonly(constant, bool))
        if means.shape != scales.shape:
            raise ValidationError("means and scales must have equal length", field="scales")
        if np.any(scales <= 0):
            raise ValidationError("scales must be strictly positive", field="scales")


def split_by_arm(d: Dataset) -> Tuple[Dataset, Dataset]:
    """
    Split a Dataset into its control (T=0) and treated (T=1) rows.

    Row order within each arm follows the original order.

    Args:
        d: Dataset to split

    Returns:
        Tuple[Dataset, Dataset]: (control, treated)

    Raises:
        ArmError: If either arm is empty

    Example:
        >>> d = Dataset.from_arrays([[1.0], [2.0], [3.0]], [0, 1, 0], [0.0, 1.0, 0.0])
        >>> control, treated = split_by_arm(d)
        >>> control.n, treated.n
        (2, 1)
    """
    control_rows = np.flatnonzero(d.T == 0)
    treated_rows = np.flatnonzero(d.T == 1)
    if control_rows.size == 0:
        raise ArmError("Control arm is empty", arm=0)
    if treated_rows.size == 0:
        raise ArmError("Treated arm is empty", arm=1)
    return d.subset(control_rows), d.subset(treated_rows)


def standardize_fit(X, binary_mask: Optional[np.ndarray] = None) -> StandardizationParams:
    """
    Learn column means and population standard deviations.

    Binary columns (per ``binary_mask``) pass through with mean 0 and scale 1.
    Constant columns keep mean 0 and scale 1 and are flagged.

    Args:
        X: n×p matrix
        binary_mask: Optional length-p boolean mask of Binary columns

    Returns:
        StandardizationParams

    Example:
        >>> params = standardize_fit(np.array([[1.0], [2.0], [3.0]]))
        >>> standardize_apply(params, np.array([[1.0], [2.0], [3.0]])).ravel().round(4)
        array([-1.2247,  0.    ,  1.2247])
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    p = X.shape[1]
    binary = np.zeros(p, dtype=bool) if binary_mask is None else np.asarray(binary_mask, dtype=bool)

    means = X.mean(axis=0)
    scales = X.std(axis=0, ddof=0)
    constant = ~(scales > 0)
    passthrough = binary | constant

    means = np.where(passthrough, 0.0, means)
    scales = np.where(passthrough, 1.0, scales)
    if np.any(constant & ~binary):
        logger.warning(f"Constant columns passed through unscaled: {np.flatnonzero(constant & ~binary).tolist()}")
    return StandardizationParams(means=means, scales=scales, constant=constant)


def standardize_apply(params: StandardizationParams, X) -> np.ndarray:
    """
    Apply stored standardization parameters to a matrix.

    Never re-estimates: the result is (X - means) / scales column-wise.

    Args:
        params: Parameters from standardize_fit
        X: m×p matrix with the fitting layout

    Returns:
        numpy.ndarray: Standardized copy of X
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    return (X - params.means) / params.scales
