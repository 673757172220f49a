"""Unit tests for the Virtual Twins engine."""

import numpy as np
import pytest

from virtual_twins_tools.data import Dataset
from virtual_twins_tools.exceptions import ArmError, ColumnMismatchError
from virtual_twins_tools.learners.base import CallableRegressor
from virtual_twins_tools.learners.specs import LassoSpec
from virtual_twins_tools.subgroup.models import (
    FixedPenalty,
    PermutationCalibrated,
    StepTwoKind,
    StepTwoSpec,
    TreeModel,
    selected_variables,
)
from virtual_twins_tools.vt import (
    VtSpec,
    compute_twins,
    estimated_effect,
    fit_step1,
    predict_optimal_arm,
    run_vt,
)


def oracle_fits():
    f0 = CallableRegressor(lambda X: X[:, 0], n_features=5)
    f1 = CallableRegressor(lambda X: X[:, 0] + 4.0 * (X[:, 1] > 0), n_features=5)
    return f0, f1


class TestComputeTwins:
    """Tests for compute_twins function."""

    def test_difference_of_predictions(self, step_data):
        """Test that z_hat = y1_hat - y0_hat row by row."""
        f0, f1 = oracle_fits()

        cf = compute_twins(f0, f1, step_data.X)

        assert np.allclose(cf.z_hat, cf.y1_hat - cf.y0_hat)
        assert np.allclose(cf.z_hat, 4.0 * (step_data.X[:, 1] > 0))

    def test_column_mismatch(self):
        """Test that a wrong covariate layout is rejected."""
        f0, f1 = oracle_fits()

        with pytest.raises(ColumnMismatchError):
            compute_twins(f0, f1, np.zeros((3, 4)))


class TestFitStep1:
    """Tests for fit_step1 function."""

    def test_one_model_per_arm(self, step_data, fast_lasso):
        """Test that the treated model picks up the extra effect of x2."""
        f0, f1 = fit_step1(step_data, fast_lasso, seed=3)

        assert f0.coefficients[1] == pytest.approx(0.0, abs=0.3)
        assert f1.coefficients[1] > 0.5

    def test_empty_arm(self, fast_lasso):
        """Test that a single-arm dataset raises ArmError."""
        d = Dataset.from_arrays(np.zeros((10, 2)), np.ones(10), np.arange(10.0))

        with pytest.raises(ArmError):
            fit_step1(d, fast_lasso)


class TestRunVt:
    """Tests for run_vt function."""

    def test_injected_step1_finds_subgroup(self, step_data):
        """Test that known arm models lead the tree to the x2 split."""
        spec = VtSpec(step1=LassoSpec(), step2=StepTwoSpec(tuning=FixedPenalty(0.01), min_leaf=10), seed=1)

        fit = run_vt(step_data, spec, step1_fits=oracle_fits())

        assert isinstance(fit.step2_model, TreeModel)
        assert selected_variables(fit.step2_model) == {1}
        assert fit.step2_model.tree.feature[0] == 1

    def test_learned_step1(self, step_data, fast_lasso, fast_step2):
        """Test the full pipeline with a fitted step 1."""
        fit = run_vt(step_data, VtSpec(step1=fast_lasso, step2=fast_step2(), seed=4))

        assert 1 in selected_variables(fit.step2_model)
        assert fit.cf.z_hat.shape == (200,)

    def test_deterministic(self, step_data, fast_lasso, fast_step2):
        """Test that the same seed gives the same effects and tree."""
        spec = VtSpec(step1=fast_lasso, step2=fast_step2(), seed=9)

        first = run_vt(step_data, spec)
        second = run_vt(step_data, spec)

        assert np.array_equal(first.cf.z_hat, second.cf.z_hat)
        assert np.array_equal(first.step2_model.tree.threshold, second.step2_model.tree.threshold, equal_nan=True)

    def test_step_two_none(self, step_data):
        """Test that kind 'none' keeps only the step-1 effects."""
        spec = VtSpec(step1=LassoSpec(), step2=StepTwoSpec(kind=StepTwoKind.NONE))

        fit = run_vt(step_data, spec, step1_fits=oracle_fits())

        assert fit.step2_model is None
        assert np.allclose(estimated_effect(fit, step_data.X), fit.cf.z_hat)

    def test_calibrated_penalty_resolved(self, step_data, fast_lasso):
        """Test that permutation tuning becomes a fixed penalty with a record."""
        step2 = StepTwoSpec(tuning=PermutationCalibrated(m=2, alpha=0.5), min_leaf=10)

        fit = run_vt(step_data, VtSpec(step1=fast_lasso, step2=step2, seed=2))

        assert fit.calibration is not None
        assert fit.calibration.m == 2
        assert fit.step2_spec.tuning == FixedPenalty(fit.calibration.threshold)

    def test_label(self, fast_lasso):
        """Test the method label."""
        assert VtSpec(step1=fast_lasso, step2=StepTwoSpec()).label == "lasso/rtree"


class TestPredictOptimalArm:
    """Tests for predict_optimal_arm function."""

    def test_positive_effect_means_treatment(self, step_data):
        """Test that arm 1 is chosen exactly where the effect is positive."""
        spec = VtSpec(step1=LassoSpec(), step2=StepTwoSpec(kind=StepTwoKind.NONE))
        fit = run_vt(step_data, spec, step1_fits=oracle_fits())

        arms = predict_optimal_arm(fit, step_data.X)

        assert np.array_equal(arms, (step_data.X[:, 1] > 0).astype(int))

    def test_zero_effect_goes_to_control(self, step_data):
        """Test that ties assign arm 0."""
        same = CallableRegressor(lambda X: X[:, 0], n_features=5)
        spec = VtSpec(step1=LassoSpec(), step2=StepTwoSpec(kind=StepTwoKind.NONE))
        fit = run_vt(step_data, spec, step1_fits=(same, same))

        assert predict_optimal_arm(fit, step_data.X).sum() == 0
