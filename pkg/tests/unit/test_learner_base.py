"""Unit tests for the learner dispatch and the prediction contract."""

import numpy as np
import pytest

from virtual_twins_tools.exceptions import ColumnMismatchError, FitError, SpecError
from virtual_twins_tools.learners.base import CallableRegressor, fit_regressor, predict
from virtual_twins_tools.learners.forest import ForestFit
from virtual_twins_tools.learners.lasso import LassoFit
from virtual_twins_tools.learners.mars import MarsFit
from virtual_twins_tools.learners.specs import ForestSpec, LassoSpec, MarsSpec


@pytest.fixture
def regression_data():
    rng = np.random.default_rng(10)
    X = rng.normal(size=(60, 3))
    return X, X[:, 0] + rng.normal(scale=0.1, size=60)


class TestFitRegressor:
    """Tests for fit_regressor dispatch."""

    def test_dispatch_by_spec_type(self, regression_data):
        """Test that each spec produces its own fit type."""
        X, y = regression_data

        assert isinstance(fit_regressor(LassoSpec(folds=3, n_lambda=10), X, y), LassoFit)
        assert isinstance(fit_regressor(ForestSpec(n_trees=3, nodesize_grid=(5,), tune_mtry=False), X, y), ForestFit)
        assert isinstance(fit_regressor(MarsSpec(max_terms=3), X, y), MarsFit)

    def test_unknown_spec(self, regression_data):
        """Test that an unknown spec type raises SpecError."""
        X, y = regression_data

        with pytest.raises(SpecError):
            fit_regressor(object(), X, y)


class TestPredict:
    """Tests for the predict contract."""

    def test_column_mismatch(self, regression_data):
        """Test that a different column count raises ColumnMismatchError."""
        X, y = regression_data
        fit = fit_regressor(LassoSpec(folds=3, n_lambda=10), X, y)

        with pytest.raises(ColumnMismatchError) as exc_info:
            predict(fit, X[:, :2])

        assert exc_info.value.expected == 3
        assert exc_info.value.got == 2

    def test_predictions_are_length_m(self, regression_data):
        """Test one prediction per input row."""
        X, y = regression_data
        fit = fit_regressor(MarsSpec(max_terms=3), X, y)

        assert predict(fit, X[:7]).shape == (7,)

    def test_callable_regressor(self):
        """Test wrapping a plain function."""
        f = CallableRegressor(lambda X: X[:, 0] * 2, n_features=1, label="double")

        assert predict(f, np.ones((3, 1))).tolist() == [2.0, 2.0, 2.0]

    def test_non_finite_predictions_rejected(self):
        """Test that NaN predictions raise FitError."""
        f = CallableRegressor(lambda X: np.full(X.shape[0], np.nan), n_features=2)

        with pytest.raises(FitError):
            predict(f, np.zeros((2, 2)))
