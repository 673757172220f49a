"""
The Virtual Twins engine.

Step 1 fits one outcome model per treatment arm. Every subject then receives
both counterfactual predictions, and their difference estimates the individual
treatment effect. Step 2 fits an interpretable model of those effects on the
covariates, which defines the subgroups.
"""

import logging
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Optional, Tuple

import numpy as np

from ..data.models import Dataset, split_by_arm
from ..exceptions import FitError
from ..learners.base import FittedRegressor, fit_regressor, predict
from ..learners.specs import RegressorSpec
from ..subgroup.fitting import fit_step_two
from ..subgroup.models import (
    FixedPenalty,
    PermutationCalibrated,
    StepTwoKind,
    StepTwoSpec,
    SubgroupModel,
    predict_effect,
)
from ..utils.seeding import derive_seed

if TYPE_CHECKING:
    from .calibration import CalibrationResult

logger = logging.getLogger(__name__)

STEP1_STREAM = 0
CALIBRATION_STREAM = 1
STEP2_STREAM = 2


@dataclass(frozen=True)
class CounterfactualPredictions:
    """
    Both counterfactual predictions and their difference for every subject.

    Attributes:
        y0_hat: Predicted outcome under control
        y1_hat: Predicted outcome under treatment
        z_hat: Estimated individual treatment effect, y1_hat - y0_hat
    """

    y0_hat: np.ndarray
    y1_hat: np.ndarray
    z_hat: np.ndarray


@dataclass(frozen=True)
class VtSpec:
    """
    A step-1/step-2 method combination.

    Attributes:
        step1: Learner for the per-arm outcome models
        step2: Step-2 model settings
        seed: Seed for every random choice in the pipeline
    """

    step1: RegressorSpec
    step2: StepTwoSpec
    seed: int = 0

    @property
    def label(self) -> str:
        """Table label, e.g. "lasso/rtree"."""
        return f"{self.step1.name}/{self.step2.label}"


@dataclass(frozen=True)
class VtFit:
    """
    Result of a Virtual Twins run.

    Attributes:
        f0: Outcome model fit on control rows
        f1: Outcome model fit on treated rows
        cf: Counterfactual predictions on the fitting data
        step2_model: Subgroup model (None iff the step-2 kind is "none")
        spec: Spec the run was started with
        step2_spec: Step-2 settings actually used (calibrated penalty resolved)
        calibration: Calibration record when the step-2 penalty was calibrated
    """

    f0: FittedRegressor
    f1: FittedRegressor
    cf: CounterfactualPredictions
    step2_model: Optional[SubgroupModel]
    spec: VtSpec
    step2_spec: StepTwoSpec
    calibration: Optional["CalibrationResult"] = None


def fit_step1(
    d: Dataset,
    spec: RegressorSpec,
    seed: int = 0,
) -> Tuple[FittedRegressor, FittedRegressor]:
    """
    Fit one outcome model per arm.

    The control model sees only T=0 rows and the treated model only T=1 rows;
    each gets its own seed derived from ``seed``.

    Args:
        d: Trial data with both arms nonempty
        spec: Learner spec
        seed: Master seed

    Returns:
        Tuple (f0, f1)

    Raises:
        ArmError: If an arm is empty
        FitError: If a learner fails (the arm is named in the message)
    """
    control, treated = split_by_arm(d)
    mask = d.binary_mask
    fits = []
    for arm, part in ((0, control), (1, treated)):
        try:
            fits.append(fit_regressor(spec, part.X, part.Y, seed=derive_seed(seed, arm), binary_mask=mask))
        except FitError as e:
            raise FitError(f"Arm {arm} {spec.name} fit failed: {e}", learner=e.learner or spec.name, fold=e.fold) from e
    logger.debug(f"Step 1 ({spec.name}) fitted on {control.n} control and {treated.n} treated rows")
    return fits[0], fits[1]


def compute_twins(f0: FittedRegressor, f1: FittedRegressor, X) -> CounterfactualPredictions:
    """
    Predict both counterfactual outcomes for every row of X.

    Args:
        f0: Control-arm model
        f1: Treated-arm model
        X: m×p covariates with the training layout

    Returns:
        CounterfactualPredictions with z_hat = y1_hat - y0_hat

    Raises:
        ColumnMismatchError: If X has the wrong number of columns

    Example:
        >>> cf = compute_twins(CallableRegressor(lambda X: 0 * X[:, 0]), CallableRegressor(lambda X: 0 * X[:, 0] + 2), X)
        >>> set(cf.z_hat)
        {2.0}
    """
    y0_hat = predict(f0, X)
    y1_hat = predict(f1, X)
    return CounterfactualPredictions(y0_hat=y0_hat, y1_hat=y1_hat, z_hat=y1_hat - y0_hat)


def run_vt(
    d: Dataset,
    spec: VtSpec,
    step1_fits: Optional[Tuple[FittedRegressor, FittedRegressor]] = None,
    workers: int = 1,
) -> VtFit:
    """
    Run both Virtual Twins steps on a dataset.

    PermutationCalibrated step-2 tuning is resolved first: the penalty is
    calibrated on ``d`` and the step-2 model is fitted with that FixedPenalty.

    Args:
        d: Trial data
        spec: Method combination and seed
        step1_fits: Optional (f0, f1) to use instead of fitting step 1
        workers: Parallel workers for calibration repetitions

    Returns:
        VtFit: Fitted pipeline

    Raises:
        ArmError, FitError, CalibrationError: Propagated from the steps
    """
    from .calibration import calibrate_step2_penalty

    d.validate()
    if step1_fits is None:
        f0, f1 = fit_step1(d, spec.step1, seed=derive_seed(spec.seed, STEP1_STREAM))
    else:
        f0, f1 = step1_fits
    cf = compute_twins(f0, f1, d.X)

    step2 = spec.step2
    kind = StepTwoKind(step2.kind)
    calibration = None
    if isinstance(step2.tuning, PermutationCalibrated):
        if kind is StepTwoKind.NONE:
            logger.warning("Calibration requested for step-2 'none'; nothing to calibrate")
        else:
            calibration = calibrate_step2_penalty(
                d,
                spec.step1,
                kind,
                m=step2.tuning.m,
                alpha=step2.tuning.alpha,
                seed=derive_seed(spec.seed, CALIBRATION_STREAM),
                min_leaf=step2.min_leaf,
                workers=workers,
            )
            step2 = replace(step2, tuning=FixedPenalty(calibration.threshold))

    model = None
    if kind is not StepTwoKind.NONE:
        model = fit_step_two(
            d.X,
            cf.z_hat,
            step2,
            seed=derive_seed(spec.seed, STEP2_STREAM),
            binary_mask=d.binary_mask,
            feature_names=d.feature_names,
        )
    logger.info(f"Virtual Twins {spec.label} fitted on n={d.n}")
    return VtFit(f0=f0, f1=f1, cf=cf, step2_model=model, spec=spec, step2_spec=step2, calibration=calibration)


def estimated_effect(fit: VtFit, X) -> np.ndarray:
    """
    Estimated treatment effect for new rows.

    Uses the step-2 model when present, otherwise the step-1 difference.
    """
    if fit.step2_model is not None:
        return predict_effect(fit.step2_model, X)
    return compute_twins(fit.f0, fit.f1, X).z_hat


def predict_optimal_arm(fit: VtFit, X) -> np.ndarray:
    """
    Estimated optimal arm per row: 1 iff the estimated effect is positive.

    An effect of exactly 0 assigns the control arm.

    Example:
        >>> predict_optimal_arm(fit, X)
        array([0, 1, 1, 0])
    """
    return (estimated_effect(fit, X) > 0).astype(np.int64)
