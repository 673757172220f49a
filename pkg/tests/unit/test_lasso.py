"""Unit tests for the cross-validated LASSO."""

import numpy as np
import pytest

from virtual_twins_tools.exceptions import FitError
from virtual_twins_tools.learners.lasso import (
    _coordinate_descent,
    fit_lasso,
    fit_lasso_at,
    lambda_max,
    soft_threshold,
)
from virtual_twins_tools.learners.specs import LambdaRule, LassoSpec


@pytest.fixture
def sparse_problem():
    """200 rows, 10 columns, two active with coefficients 3 and -2."""
    rng = np.random.default_rng(2)
    X = rng.normal(size=(200, 10))
    y = 1.0 + 3.0 * X[:, 0] - 2.0 * X[:, 3] + rng.normal(scale=0.5, size=200)
    return X, y


class TestSoftThreshold:
    """Tests for soft_threshold function."""

    def test_shrinks_towards_zero(self):
        """Test shrinkage and zeroing."""
        assert soft_threshold(np.array([3.0, -0.5, -2.0]), 1.0).tolist() == [2.0, 0.0, -1.0]


class TestCoordinateDescent:
    """Tests for the covariance-form coordinate descent solver."""

    @pytest.fixture
    def correlated_design(self):
        """Gram and correlation vectors of a centered design with correlated columns."""
        rng = np.random.default_rng(5)
        base = rng.normal(size=(300, 1))
        Z = 0.8 * base + 0.6 * rng.normal(size=(300, 8))
        Z -= Z.mean(axis=0)
        y = 2.0 * Z[:, 0] - Z[:, 4] + rng.normal(size=300)
        y -= y.mean()
        return (Z.T @ Z) / 300, Z.T @ y / 300, float(np.var(y))

    def test_solution_satisfies_optimality_conditions(self, correlated_design):
        """Test the subgradient conditions at the returned coefficients."""
        gram, corr, y_var = correlated_design
        penalty = 0.1

        beta = _coordinate_descent(gram, corr, penalty, np.zeros(8), 1e-7, 1000, y_var)
        grad = corr - gram @ beta

        active = beta != 0
        assert active.any()
        assert np.allclose(grad[active], penalty * np.sign(beta[active]), atol=5e-3)
        assert np.all(np.abs(grad[~active]) <= penalty + 5e-3)

    def test_matches_tight_tolerance_solution(self, correlated_design):
        """Test that the default tolerance agrees with a near-exact solve."""
        gram, corr, y_var = correlated_design

        default = _coordinate_descent(gram, corr, 0.05, np.zeros(8), 1e-7, 1000, y_var)
        tight = _coordinate_descent(gram, corr, 0.05, np.zeros(8), 1e-16, 100000, y_var)

        assert np.allclose(default, tight, atol=1e-3)

    def test_pass_budget_stops_early(self, correlated_design):
        """Test that a single allowed pass returns without converging."""
        gram, corr, y_var = correlated_design

        capped = _coordinate_descent(gram, corr, 0.05, np.zeros(8), 1e-7, 1, y_var)
        converged = _coordinate_descent(gram, corr, 0.05, np.zeros(8), 1e-7, 1000, y_var)

        assert np.all(np.isfinite(capped))
        assert not np.allclose(capped, converged, atol=1e-6)

    def test_warm_start_is_not_modified(self, correlated_design):
        """Test that the starting vector is copied, not updated in place."""
        gram, corr, y_var = correlated_design
        start = np.zeros(8)

        _coordinate_descent(gram, corr, 0.05, start, 1e-7, 1000, y_var)

        assert np.all(start == 0)


class TestLambdaMax:
    """Tests for lambda_max function."""

    def test_no_coefficient_at_lambda_max(self, sparse_problem):
        """Test that every coefficient is zero at lambda_max."""
        X, y = sparse_problem
        lmax = lambda_max(X, y)

        _, coefficients = fit_lasso_at(X, y, lmax)

        assert np.all(coefficients == 0)

    def test_some_coefficient_below_lambda_max(self, sparse_problem):
        """Test that a slightly smaller penalty activates a variable."""
        X, y = sparse_problem
        lmax = lambda_max(X, y)

        _, coefficients = fit_lasso_at(X, y, 0.95 * lmax)

        assert np.count_nonzero(coefficients) >= 1


class TestFitLasso:
    """Tests for fit_lasso function."""

    def test_recovers_active_set(self, sparse_problem):
        """Test that the true variables are selected with the right signs."""
        X, y = sparse_problem

        fit = fit_lasso(X, y, LassoSpec(folds=5, n_lambda=30), seed=1)

        assert {0, 3} <= set(fit.active_set().tolist())
        assert fit.coefficients[0] > 2.0
        assert fit.coefficients[3] < -1.0

    def test_one_se_penalty_not_below_minimum(self, sparse_problem):
        """Test lambda_1se >= lambda_min."""
        X, y = sparse_problem

        fit = fit_lasso(X, y, LassoSpec(folds=5, n_lambda=30), seed=1)

        assert fit.lambda_1se >= fit.lambda_min
        assert fit.lambda_chosen == fit.lambda_1se

    def test_lambda_min_rule(self, sparse_problem):
        """Test that the lambda_min rule uses the CV minimum."""
        X, y = sparse_problem

        fit = fit_lasso(X, y, LassoSpec(folds=5, n_lambda=30, rule=LambdaRule.LAMBDA_MIN), seed=1)

        assert fit.lambda_chosen == fit.lambda_min

    def test_path_is_decreasing(self, sparse_problem):
        """Test the log-spaced penalty path runs from lambda_max downwards."""
        X, y = sparse_problem

        fit = fit_lasso(X, y, LassoSpec(folds=3, n_lambda=20), seed=0)

        assert fit.lambda_path.shape == (20,)
        assert np.all(np.diff(fit.lambda_path) < 0)
        assert fit.lambda_path[0] == pytest.approx(lambda_max(X, y))
        assert fit.coef_path.shape == (10, 20)

    def test_same_seed_same_fit(self, sparse_problem):
        """Test determinism for a fixed seed."""
        X, y = sparse_problem
        spec = LassoSpec(folds=3, n_lambda=20)

        a = fit_lasso(X, y, spec, seed=4)
        b = fit_lasso(X, y, spec, seed=4)

        assert np.array_equal(a.coefficients, b.coefficients)
        assert a.lambda_chosen == b.lambda_chosen

    def test_binary_columns_unscaled(self):
        """Test that a 0/1 column marked binary still predicts correctly."""
        rng = np.random.default_rng(8)
        X = np.column_stack([rng.normal(size=150), rng.integers(0, 2, size=150)])
        y = 4.0 * X[:, 1] + rng.normal(scale=0.2, size=150)

        fit = fit_lasso(X, y, LassoSpec(folds=3, n_lambda=30), seed=0, binary_mask=np.array([False, True]))

        assert fit.coefficients[1] > 3.0

    def test_constant_outcome_gives_intercept_only(self):
        """Test that a constant outcome returns the intercept-only fit."""
        X = np.random.default_rng(0).normal(size=(30, 4))

        fit = fit_lasso(X, np.full(30, 2.5), LassoSpec(folds=3, n_lambda=10))

        assert np.all(fit.coefficients == 0)
        assert fit.predict(X) == pytest.approx(np.full(30, 2.5))

    def test_too_few_rows(self):
        """Test that n < folds raises FitError."""
        with pytest.raises(FitError) as exc_info:
            fit_lasso(np.ones((3, 2)), np.arange(3.0), LassoSpec(folds=5))

        assert exc_info.value.learner == "lasso"

    def test_non_finite_input(self):
        """Test that NaN covariates raise FitError."""
        X = np.random.default_rng(0).normal(size=(20, 2))
        X[0, 0] = np.nan

        with pytest.raises(FitError):
            fit_lasso(X, np.arange(20.0), LassoSpec(folds=3))
