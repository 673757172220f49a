"""Monte-Carlo checks of method accuracy, variable selection and calibration.

Replicate counts are reduced and forests are smaller than the defaults, so the
bands below carry roughly two Monte-Carlo standard errors of slack. Marked slow.
"""

import math
import os

import pytest

from virtual_twins_tools.harness.benchmark import run_benchmark
from virtual_twins_tools.harness.config import BenchmarkConfig
from virtual_twins_tools.learners.specs import ForestSpec, LassoSpec
from virtual_twins_tools.metrics import GroundTruthMode
from virtual_twins_tools.simulation import ScenarioConfig, generate
from virtual_twins_tools.subgroup.models import PermutationCalibrated, StepTwoKind, StepTwoSpec, selected_variables
from virtual_twins_tools.vt import VtSpec, run_vt

pytestmark = pytest.mark.slow

REPLICATES = 20
WORKERS = min(4, os.cpu_count() or 1)
FOREST = ForestSpec(n_trees=100)


def accuracy(table, method_index):
    return table.cell(0, method_index).aggregate.mean_accuracy


@pytest.fixture(scope="module")
def linear_table():
    """LASSO and forest without step 2, plus LASSO with a conditional tree, on the linear design."""
    config = BenchmarkConfig(
        scenarios=[ScenarioConfig()],
        method_grid=[
            VtSpec(step1=LassoSpec(), step2=StepTwoSpec(kind=StepTwoKind.NONE)),
            VtSpec(step1=FOREST, step2=StepTwoSpec(kind=StepTwoKind.NONE)),
            VtSpec(step1=LassoSpec(), step2=StepTwoSpec(kind=StepTwoKind.CONDITIONAL_TREE)),
        ],
        replicates=REPLICATES,
        workers=WORKERS,
        seed=2024,
        export_trees=False,
    )
    return run_benchmark(config)


@pytest.fixture(scope="module")
def nonlinear_table():
    """Forest step 1 with a regression tree and with a linear step 2 on the nonlinear design."""
    config = BenchmarkConfig(
        scenarios=[ScenarioConfig(linearity="nonlinear")],
        method_grid=[
            VtSpec(step1=FOREST, step2=StepTwoSpec(kind=StepTwoKind.REGRESSION_TREE)),
            VtSpec(step1=FOREST, step2=StepTwoSpec(kind=StepTwoKind.LINEAR)),
        ],
        replicates=REPLICATES,
        workers=WORKERS,
        seed=2025,
        ground_truth_mode=GroundTruthMode.NOISELESS,
        export_trees=False,
    )
    return run_benchmark(config)


class TestLinearHeadline:
    """LASSO step 1 on the linear design."""

    def test_lasso_accuracy_band(self, linear_table):
        """Test that LASSO with no step 2 classifies 73-87% of test rows correctly."""
        assert not linear_table.partial
        assert 0.73 <= accuracy(linear_table, 0) <= 0.87

    def test_lasso_beats_forest(self, linear_table):
        """Test that LASSO is at least 0.08 more accurate than the forest."""
        assert accuracy(linear_table, 0) - accuracy(linear_table, 1) >= 0.08

    def test_conditional_tree_precision(self, linear_table):
        """Test that at least 80% of the variables the conditional tree selects are predictive."""
        precision = linear_table.cell(0, 2).aggregate.pooled_precision

        assert precision is not None
        assert precision >= 0.80


class TestNonlinearHeadline:
    """Forest step 1 on the nonlinear design."""

    def test_regression_tree_accuracy_band(self, nonlinear_table):
        """Test that forest plus regression tree classifies 78-92% of test rows correctly."""
        assert not nonlinear_table.partial
        assert 0.78 <= accuracy(nonlinear_table, 0) <= 0.92

    def test_tree_beats_linear_step_two(self, nonlinear_table):
        """Test that the tree is at least 0.05 more accurate than the linear step 2."""
        assert accuracy(nonlinear_table, 0) - accuracy(nonlinear_table, 1) >= 0.05


class TestCalibrationErrorControl:
    """Permutation-calibrated penalties without a heterogeneous effect."""

    def test_false_selection_rate(self):
        """Test that at most alpha + 3 binomial SDs of null datasets select a covariate."""
        alpha = 0.2
        datasets = 20
        spec = StepTwoSpec(tuning=PermutationCalibrated(m=20, alpha=alpha))

        selecting = 0
        for seed in range(datasets):
            sim = generate(ScenarioConfig(teh=False, n_test=10).with_seed(seed))
            fit = run_vt(sim.train, VtSpec(step1=LassoSpec(folds=5, n_lambda=30), step2=spec, seed=seed), workers=WORKERS)
            selecting += bool(selected_variables(fit.step2_model))

        slack = 3 * math.sqrt(alpha * (1 - alpha) / datasets)
        assert selecting / datasets <= alpha + slack
