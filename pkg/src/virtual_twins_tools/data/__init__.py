"""Core data containers, CSV ingestion, arm splitting and standardization."""

from .csv_io import CsvSchema, infer_schema, load_csv, write_csv
from .models import (
    ColumnKind,
    ColumnMeta,
    Dataset,
    StandardizationParams,
    split_by_arm,
    standardize_apply,
    standardize_fit,
)

__all__ = [
    "ColumnKind",
    "ColumnMeta",
    "CsvSchema",
    "Dataset",
    "StandardizationParams",
    "infer_schema",
    "load_csv",
    "split_by_arm",
    "standardize_apply",
    "standardize_fit",
    "write_csv",
]
