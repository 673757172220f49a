"""
CSV ingestion and export for trial datasets.

Files are comma-separated with a header row, UTF-8 encoded and use '.' as the
decimal separator. Treatment and outcome columns are named by the schema; every
other column listed in the schema is a covariate.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import pandas as pd

from ..constants import DEFAULT_OUTCOME_COLUMN, DEFAULT_TREATMENT_COLUMN
from ..exceptions import DataError, OutputError, SchemaError, ValidationError
from ..utils.file_ops import ensure_directory_exists
from .models import ColumnKind, ColumnMeta, Dataset

logger = logging.getLogger(__name__)


@dataclass
class CsvSchema:
    """
    Expected layout of a trial CSV.

    Attributes:
        columns: Covariate metadata in matrix order
        treatment: Name of the treatment column
        outcome: Name of the outcome column

    Example:
        >>> schema = CsvSchema(
        ...     columns=[ColumnMeta("x1", ColumnKind.CONTINUOUS, 0)],
        ...     treatment="trt",
        ...     outcome="y",
        ... )
        >>> schema.validate()
    """

    columns: List[ColumnMeta] = field(default_factory=list)
    treatment: str = DEFAULT_TREATMENT_COLUMN
    outcome: str = DEFAULT_OUTCOME_COLUMN

    def validate(self) -> None:
        """
        Validate the schema itself.

        Raises:
            SchemaError: If names collide or the covariate list is empty
        """
        names = [c.name for c in self.columns]
        if not names:
            raise SchemaError("Schema has no covariate columns")
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise SchemaError(f"Duplicate covariate column: {duplicates[0]}", column=duplicates[0])
        for reserved in (self.treatment, self.outcome):
            if reserved in names:
                raise SchemaError(f"Column {reserved} is both a covariate and treatment/outcome", column=reserved)
        if self.treatment == self.outcome:
            raise SchemaError("Treatment and outcome columns must differ", column=self.treatment)

    @property
    def names(self) -> List[str]:
        return [c.name for c in self.columns]


def _read_frame(path: Path) -> pd.DataFrame:
    if not path.exists():
        raise DataError(f"Data file not found: {path}")
    try:
        frame = pd.read_csv(path, sep=",", encoding="utf-8", float_precision="round_trip", skipinitialspace=True)
    except pd.errors.EmptyDataError as e:
        raise SchemaError(f"Data file {path} has no header row") from e
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise ValidationError(f"Cannot parse {path}: {e}", field="file", value=str(path)) from e
    frame.columns = [str(c).strip() for c in frame.columns]
    return frame


def _numeric_column(frame: pd.DataFrame, name: str) -> np.ndarray:
    raw = frame[name]
    if raw.isna().any():
        row = int(np.flatnonzero(raw.isna().to_numpy())[0])
        raise ValidationError(f"Missing value in column {name} at row {row}", field=name, value=None)
    if not pd.api.types.is_numeric_dtype(raw) or pd.api.types.is_bool_dtype(raw):
        coerced = pd.to_numeric(raw, errors="coerce")
        row = int(np.flatnonzero(coerced.isna().to_numpy())[0]) if coerced.isna().any() else 0
        raise ValidationError(
            f"Non-numeric value {raw.iloc[row]!r} in column {name} at row {row}",
            field=name,
            value=raw.iloc[row],
        )
    return raw.to_numpy(dtype=float)


def infer_schema(
    path: Union[str, Path],
    treatment: str = DEFAULT_TREATMENT_COLUMN,
    outcome: str = DEFAULT_OUTCOME_COLUMN,
) -> CsvSchema:
    """
    Infer a schema from a CSV header and its values.

    Every column other than the treatment and outcome columns becomes a covariate,
    in file order. A covariate whose values all lie in {0, 1} is Binary, otherwise
    Continuous.

    Args:
        path: CSV file path
        treatment: Treatment column name
        outcome: Outcome column name

    Returns:
        CsvSchema: The inferred schema

    Raises:
        SchemaError: If the treatment or outcome column is missing
        ValidationError: If a covariate cell is not numeric
    """
    path = Path(path)
    frame = _read_frame(path)
    for required in (treatment, outcome):
        if required not in frame.columns:
            raise SchemaError(f"Missing column: {required}", column=required)

    columns: List[ColumnMeta] = []
    for name in frame.columns:
        if name in (treatment, outcome):
            continue
        values = _numeric_column(frame, name)
        kind = ColumnKind.BINARY if np.all((values == 0) | (values == 1)) else ColumnKind.CONTINUOUS
        columns.append(ColumnMeta(name=name, kind=kind, index=len(columns)))

    schema = CsvSchema(columns=columns, treatment=treatment, outcome=outcome)
    schema.validate()
    logger.info(
        f"Inferred schema for {path.name}: {len(columns)} covariates "
        f"({sum(c.kind is ColumnKind.BINARY for c in columns)} binary)"
    )
    return schema


def load_csv(path: Union[str, Path], schema: Optional[CsvSchema] = None) -> Dataset:
    """
    Load a trial CSV into a validated Dataset.

    Row order is preserved. Covariates follow the schema's order, regardless of
    their position in the file.

    Args:
        path: CSV file path
        schema: Expected layout (default: inferred with treatment "trt" and outcome "y")

    Returns:
        Dataset: Validated dataset

    Raises:
        DataError: If the file does not exist
        SchemaError: If a schema column is missing from the header
        ValidationError: On non-numeric or missing cells, treatment values outside
            {0, 1}, or Binary covariates outside {0, 1}

    Example:
        >>> d = load_csv("trial.csv")
        >>> d.n, d.p
        (538, 46)
    """
    path = Path(path)
    if schema is None:
        schema = infer_schema(path)
    schema.validate()

    frame = _read_frame(path)
    for name in schema.names + [schema.treatment, schema.outcome]:
        if name not in frame.columns:
            raise SchemaError(f"Missing column: {name}", column=name)

    X = np.column_stack([_numeric_column(frame, name) for name in schema.names])
    T = _numeric_column(frame, schema.treatment)
    Y = _numeric_column(frame, schema.outcome)

    columns = tuple(ColumnMeta(name=c.name, kind=ColumnKind(c.kind), index=j) for j, c in enumerate(schema.columns))
    dataset = Dataset(columns=columns, X=X, T=T, Y=Y)
    logger.info(f"Loaded {path.name}: n={dataset.n}, p={dataset.p}")
    return dataset


def _format_column(values: np.ndarray, binary: bool) -> List[str]:
    if binary:
        return [str(int(v)) for v in values]
    return [repr(float(v)) for v in values]


def write_csv(
    d: Dataset,
    path: Union[str, Path],
    treatment: str = DEFAULT_TREATMENT_COLUMN,
    outcome: str = DEFAULT_OUTCOME_COLUMN,
) -> Path:
    """
    Write a Dataset as CSV in the ingestion format.

    Floats are written with their shortest round-trip representation, so that
    load_csv reproduces X, T and Y exactly.

    Args:
        d: Dataset to write
        path: Destination file
        treatment: Treatment column name
        outcome: Outcome column name

    Returns:
        Path: The written file
    """
    path = Path(path)
    if path.parent != Path("."):
        ensure_directory_exists(path.parent)

    data = {}
    for column in d.columns:
        data[column.name] = _format_column(d.X[:, column.index], column.kind is ColumnKind.BINARY)
    data[treatment] = [str(int(t)) for t in d.T]
    data[outcome] = _format_column(d.Y, False)

    frame = pd.DataFrame(data)
    try:
        frame.to_csv(path, index=False, lineterminator="\n")
    except OSError as e:
        raise OutputError(f"Cannot write {path}: {e}", path=str(path)) from e
    logger.debug(f"Wrote {d.n} rows to {path}")
    return path
