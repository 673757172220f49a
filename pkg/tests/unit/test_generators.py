"""Unit tests for the simulation generators."""

import json

import numpy as np
import pandas as pd
import pytest

from virtual_twins_tools.data import ColumnKind
from virtual_twins_tools.exceptions import SamplingError
from virtual_twins_tools.simulation import (
    ScenarioConfig,
    assign_treatment,
    draw_covariates,
    generate,
    linear_means,
    nonlinear_means,
    oracle_step1,
    selection_bias_sample,
    true_predictive_set,
    write_simulation,
)
from virtual_twins_tools.simulation.generators import (
    correlation_matrix,
    covariate_layout,
    population_size,
    selection_score,
)
from virtual_twins_tools.simulation.scenarios import Linearity, Structure
from virtual_twins_tools.vt import compute_twins


class TestCovariates:
    """Tests for covariate layout and draws."""

    def test_layout(self):
        """Test 100 continuous and 10 binary columns with 1-based names."""
        names, kinds = covariate_layout()

        assert len(names) == 110
        assert names[0] == "X1" and names[99] == "X100"
        assert names[100] == "C101" and names[109] == "C110"
        assert kinds.count(ColumnKind.BINARY) == 10

    def test_correlation_block(self):
        """Test the 0.7 block among the first four continuous columns."""
        sigma = correlation_matrix(Structure.CORRELATED)

        assert sigma[0, 3] == 0.7
        assert sigma[0, 4] == 0.0
        assert np.array_equal(correlation_matrix(Structure.REGULAR), np.eye(100))

    def test_draw_shapes_and_binary_values(self):
        """Test matrix shape and 0/1 binary block."""
        draw = draw_covariates(ScenarioConfig(), 50, seed=1)

        assert draw.X.shape == (50, 110)
        assert draw.mu.shape == (100,)
        assert set(np.unique(draw.X[:, 100:])) <= {0.0, 1.0}

    def test_treatment_is_binary(self):
        """Test treatment values and rough balance."""
        T = assign_treatment(4000, seed=2)

        assert set(np.unique(T)) == {0, 1}
        assert T.mean() == pytest.approx(0.5, abs=0.03)


class TestOutcomeModels:
    """Tests for conditional means and predictive sets."""

    def test_linear_effect_uses_predictive_columns(self):
        """Test that the linear effect is the sum over the predictive set."""
        X = np.random.default_rng(0).normal(size=(5, 110))
        y0, y1 = linear_means(X, teh=True)
        predictive = sorted(true_predictive_set(ScenarioConfig()))

        assert np.allclose(y1 - y0, X[:, predictive].sum(axis=1))

    def test_linear_without_heterogeneity(self):
        """Test the constant +2 shift."""
        X = np.random.default_rng(0).normal(size=(5, 110))
        y0, y1 = linear_means(X, teh=False)

        assert np.allclose(y1 - y0, 2.0)

    def test_nonlinear_cell_effects(self):
        """Test the effect in each cell of the heterogeneous nonlinear model."""
        mu = np.zeros(100)
        X = np.zeros((4, 110))
        X[0, [0, 1]] = 1.0
        X[1, 0] = 1.0
        X[2, 4] = 1.0

        y0, y1 = nonlinear_means(X, mu, teh=True)

        assert (y1 - y0).tolist() == [2.0, -3.0, 0.0, 1.0]

    def test_nonlinear_without_heterogeneity(self):
        """Test the constant shift of the shared table."""
        X = np.random.default_rng(1).normal(size=(6, 110))
        y0, y1 = nonlinear_means(X, np.zeros(100), teh=False)

        assert np.allclose(y1 - y0, 2.0)

    def test_predictive_sets(self):
        """Test the true predictive covariates of each scenario."""
        assert true_predictive_set(ScenarioConfig()) == frozenset({0, 16, 17, 18, 19, 102, 103, 104})
        assert true_predictive_set(ScenarioConfig(linearity="nonlinear")) == frozenset({0, 1, 4})
        assert true_predictive_set(ScenarioConfig(teh=False)) == frozenset()


class TestSelectionBiasSample:
    """Tests for selection_bias_sample function."""

    def test_quarter_from_bottom_half(self):
        """Test the 50/150 split for a training size of 200."""
        X = draw_covariates(ScenarioConfig(), 400, seed=3).X
        config = ScenarioConfig(structure="selection_bias", n_train=200, seed=4)
        score = selection_score(X, Linearity.LINEAR)
        cutoff = np.sort(score)[199]

        rows = selection_bias_sample(X, config)

        assert len(rows) == 200
        assert len(np.unique(rows)) == 200
        assert int((score[rows] <= cutoff).sum()) == 50

    def test_constant_score(self):
        """Test that a constant score raises SamplingError."""
        with pytest.raises(SamplingError):
            selection_bias_sample(np.zeros((40, 110)), ScenarioConfig(structure="sb", n_train=10))

    def test_pool_too_small(self):
        """Test that an unfillable top-half quota raises SamplingError."""
        X = draw_covariates(ScenarioConfig(), 40, seed=3).X

        with pytest.raises(SamplingError) as exc_info:
            selection_bias_sample(X, ScenarioConfig(structure="sb", n_train=40))

        assert exc_info.value.quota == 30


class TestGenerate:
    """Tests for generate and oracle_step1."""

    def test_sizes(self, small_replicate):
        """Test train and test sizes and the covariate count."""
        assert small_replicate.train.n == 200
        assert small_replicate.test.n == 300
        assert small_replicate.train.p == 110
        assert small_replicate.test_truth.z_true.shape == (300,)

    def test_population_size(self):
        """Test the larger pool under selection bias."""
        assert population_size(ScenarioConfig(n_train=100, n_test=50)) == 150
        assert population_size(ScenarioConfig(structure="sb", n_train=100, n_test=50)) == 250

    def test_selection_bias_replicate(self):
        """Test that a selection-bias replicate has the requested sizes."""
        sim = generate(ScenarioConfig(structure="selection_bias", n_train=80, n_test=60, seed=2))

        assert sim.train.n == 80
        assert sim.test.n == 60

    def test_deterministic(self):
        """Test that a scenario seed reproduces the replicate."""
        config = ScenarioConfig(linearity="nonlinear", n_train=50, n_test=30, seed=12)

        first = generate(config)
        second = generate(config)

        assert np.array_equal(first.train.X, second.train.X)
        assert np.array_equal(first.test.Y, second.test.Y)

    def test_observed_outcome_matches_arm(self, small_replicate):
        """Test that Y is the potential outcome of the assigned arm."""
        truth = small_replicate.train_truth
        T = small_replicate.train.T

        assert np.allclose(small_replicate.train.Y, np.where(T == 1, truth.y1, truth.y0))

    def test_oracle_reproduces_true_effects(self, nonlinear_replicate):
        """Test that the oracle step 1 gives the true effects."""
        f0, f1 = oracle_step1(nonlinear_replicate)

        cf = compute_twins(f0, f1, nonlinear_replicate.test.X)

        assert np.allclose(cf.z_hat, nonlinear_replicate.test_truth.z_true)


class TestWriteSimulation:
    """Tests for write_simulation function."""

    def test_files_written(self, small_replicate, temp_dir):
        """Test the four files and their contents."""
        paths = write_simulation(small_replicate, temp_dir / "sim")

        assert [p.name for p in paths] == ["train.csv", "test.csv", "truth.csv", "scenario.json"]
        train = pd.read_csv(temp_dir / "sim" / "train.csv")
        truth = pd.read_csv(temp_dir / "sim" / "truth.csv")
        meta = json.loads((temp_dir / "sim" / "scenario.json").read_text())
        assert list(train.columns[-2:]) == ["trt", "y"]
        assert len(train) == 200
        assert len(truth) == 500
        assert meta["predictive_set"] == [0, 16, 17, 18, 19, 102, 103, 104]
        assert meta["label"] == "linear/reg/teh/n=200"
