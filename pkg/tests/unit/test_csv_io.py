"""Unit tests for CSV ingestion and export."""

import numpy as np
import pytest

from virtual_twins_tools.data import (
    ColumnKind,
    ColumnMeta,
    CsvSchema,
    Dataset,
    infer_schema,
    load_csv,
    write_csv,
)
from virtual_twins_tools.exceptions import DataError, SchemaError, ValidationError


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


class TestInferSchema:
    """Tests for infer_schema function."""

    def test_binary_and_continuous_detected(self, temp_dir):
        """Test that 0/1 columns are Binary and others Continuous."""
        path = _write(temp_dir / "trial.csv", "age,smoker,trt,y\n41.5,1,0,2.0\n38.0,0,1,3.5\n")

        schema = infer_schema(path)

        assert schema.names == ["age", "smoker"]
        assert schema.columns[0].kind is ColumnKind.CONTINUOUS
        assert schema.columns[1].kind is ColumnKind.BINARY

    def test_custom_column_names(self, temp_dir):
        """Test inference with non-default treatment and outcome names."""
        path = _write(temp_dir / "trial.csv", "arm,x,response\n0,1.5,2.0\n1,2.5,3.0\n")

        schema = infer_schema(path, treatment="arm", outcome="response")

        assert schema.names == ["x"]

    def test_missing_treatment_column(self, temp_dir):
        """Test that a missing treatment column raises SchemaError."""
        path = _write(temp_dir / "trial.csv", "x,y\n1.0,2.0\n")

        with pytest.raises(SchemaError) as exc_info:
            infer_schema(path)

        assert exc_info.value.column == "trt"


class TestLoadCsv:
    """Tests for load_csv function."""

    def test_load_preserves_rows(self, temp_dir):
        """Test values and row order."""
        path = _write(temp_dir / "trial.csv", "x1,trt,y\n0.25,1,3.0\n-1.5,0,2.0\n2.0,1,1.0\n")

        d = load_csv(path)

        assert d.X[:, 0].tolist() == [0.25, -1.5, 2.0]
        assert d.T.tolist() == [1, 0, 1]
        assert d.Y.tolist() == [3.0, 2.0, 1.0]

    def test_schema_order_wins_over_file_order(self, temp_dir):
        """Test that covariates follow the schema order."""
        path = _write(temp_dir / "trial.csv", "b,a,trt,y\n1.0,2.0,0,0.0\n3.0,4.0,1,1.0\n")
        schema = CsvSchema(
            columns=[ColumnMeta("a", ColumnKind.CONTINUOUS, 0), ColumnMeta("b", ColumnKind.CONTINUOUS, 1)]
        )

        d = load_csv(path, schema)

        assert d.feature_names == ["a", "b"]
        assert d.X[0].tolist() == [2.0, 1.0]

    def test_treatment_value_two_rejected(self, temp_dir):
        """Test that a treatment value of 2 fails with 'treatment not binary'."""
        path = _write(temp_dir / "trial.csv", "x1,trt,y\n0.5,2,1.0\n0.7,0,1.0\n")

        with pytest.raises(ValidationError) as exc_info:
            load_csv(path)

        assert "treatment not binary" in str(exc_info.value)

    def test_missing_cell_rejected(self, temp_dir):
        """Test that an empty cell raises with the column name."""
        path = _write(temp_dir / "trial.csv", "x1,trt,y\n0.5,1,\n0.7,0,1.0\n")

        with pytest.raises(ValidationError) as exc_info:
            load_csv(path)

        assert exc_info.value.field == "y"

    def test_non_numeric_cell_rejected(self, temp_dir):
        """Test that text in a covariate column raises."""
        path = _write(temp_dir / "trial.csv", "x1,trt,y\nhigh,1,1.0\n0.7,0,1.0\n")

        with pytest.raises(ValidationError) as exc_info:
            load_csv(path)

        assert exc_info.value.field == "x1"

    def test_missing_file(self, temp_dir):
        """Test that a missing file raises DataError."""
        with pytest.raises(DataError):
            load_csv(temp_dir / "absent.csv")

    def test_missing_schema_column(self, temp_dir):
        """Test that a schema column absent from the header raises SchemaError."""
        path = _write(temp_dir / "trial.csv", "x1,trt,y\n0.5,1,1.0\n")
        schema = CsvSchema(columns=[ColumnMeta("x9", ColumnKind.CONTINUOUS, 0)])

        with pytest.raises(SchemaError) as exc_info:
            load_csv(path, schema)

        assert exc_info.value.column == "x9"


class TestCsvSchema:
    """Tests for CsvSchema validation."""

    def test_treatment_as_covariate_rejected(self):
        """Test that the treatment column cannot also be a covariate."""
        schema = CsvSchema(columns=[ColumnMeta("trt", ColumnKind.BINARY, 0)])

        with pytest.raises(SchemaError):
            schema.validate()

    def test_empty_schema_rejected(self):
        """Test that a schema needs at least one covariate."""
        with pytest.raises(SchemaError):
            CsvSchema().validate()


class TestWriteCsv:
    """Tests for write_csv function."""

    def test_written_file_loads_back_exactly(self, temp_dir):
        """Test that load_csv reproduces X, T and Y from a written file."""
        rng = np.random.default_rng(3)
        X = np.column_stack([rng.normal(size=20), rng.integers(0, 2, size=20)])
        d = Dataset.from_arrays(
            X, np.arange(20) % 2, rng.normal(size=20), names=["x1", "c1"],
            kinds=[ColumnKind.CONTINUOUS, ColumnKind.BINARY],
        )

        path = write_csv(d, temp_dir / "out" / "train.csv")
        loaded = load_csv(path)

        assert np.array_equal(loaded.X, d.X)
        assert np.array_equal(loaded.T, d.T)
        assert np.array_equal(loaded.Y, d.Y)
        assert loaded.binary_mask.tolist() == [False, True]
