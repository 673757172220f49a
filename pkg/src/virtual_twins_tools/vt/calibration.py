"""
Permutation calibration of the step-2 penalty.

Permuting the treatment labels destroys any real treatment effect
heterogeneity while keeping the covariate and outcome distributions. For each
permutation the whole step-1 procedure (including its own tuning) is refit,
and the smallest penalty that would keep the step-2 model free of covariates
is recorded. The (1 - alpha) quantile of those null penalties is the
calibrated penalty: on data without heterogeneity, the step-2 model then
includes any covariate with probability at most about alpha.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from joblib import Parallel, delayed

from ..constants import CALIBRATION_ALPHA, CALIBRATION_M, MIN_LEAF
from ..data.models import Dataset
from ..exceptions import CalibrationError, SpecError
from ..learners.lasso import lambda_max
from ..learners.specs import RegressorSpec
from ..subgroup.conditional_tree import max_root_statistic
from ..subgroup.models import StepTwoKind
from ..subgroup.regression_tree import root_improvement
from ..utils.seeding import derive_seed, make_rng
from .engine import compute_twins, fit_step1

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CalibrationResult:
    """
    Null penalty samples and the calibrated threshold.

    Attributes:
        threshold: The ceil((1 - alpha) * m)-th smallest null penalty
        samples: Null penalty of each repetition, in repetition order
        m: Number of repetitions
        alpha: Target inclusion probability under no heterogeneity
        kind: Step-2 kind the penalty applies to
    """

    threshold: float
    samples: np.ndarray
    m: int
    alpha: float
    kind: StepTwoKind


def null_penalty(
    X,
    z_null,
    kind: StepTwoKind,
    min_leaf: int = 1,
    binary_mask: Optional[np.ndarray] = None,
) -> float:
    """
    Smallest penalty under which the step-2 model contains no covariates.

    - linear: lambda_max = max_j |<x_j, z - mean(z)>| / n on standardized columns
    - regression_tree: relative error improvement of the best root split
    - conditional_tree: largest root association statistic

    Args:
        X: n×p covariates
        z_null: Length-n effects estimated under permuted treatment
        kind: Step-2 kind
        min_leaf: Minimum leaf size (regression tree)
        binary_mask: Columns left unscaled (linear)

    Returns:
        float: Non-negative penalty; 0 when z_null is constant

    Raises:
        SpecError: For the "none" kind
    """
    X = np.asarray(X, dtype=float)
    z_null = np.asarray(z_null, dtype=float)
    kind = StepTwoKind(kind)
    if np.ptp(z_null) == 0.0:
        return 0.0
    if kind is StepTwoKind.LINEAR:
        return lambda_max(X, z_null, binary_mask)
    if kind is StepTwoKind.REGRESSION_TREE:
        return root_improvement(X, z_null, min_leaf=min_leaf)
    if kind is StepTwoKind.CONDITIONAL_TREE:
        return max_root_statistic(X, z_null)
    raise SpecError("Step-2 kind 'none' has no penalty", field="kind", value=kind)


def quantile_index(m: int, alpha: float) -> int:
    """
    0-based index of the ceil((1 - alpha) * m)-th order statistic.

    Example:
        >>> quantile_index(100, 0.05)
        94
    """
    rank = math.ceil(round((1.0 - alpha) * m, 9))
    return min(max(rank, 1), m) - 1


def _null_repetition(
    d: Dataset,
    step1: RegressorSpec,
    kind: StepTwoKind,
    seed: int,
    repetition: int,
    min_leaf: int,
) -> float:
    try:
        permuted = make_rng(seed, repetition, 0).permutation(d.T)
        f0, f1 = fit_step1(d.with_treatment(permuted), step1, seed=derive_seed(seed, repetition, 1))
        z_null = compute_twins(f0, f1, d.X).z_hat
        return null_penalty(d.X, z_null, kind, min_leaf=min_leaf, binary_mask=d.binary_mask)
    except Exception as e:
        raise CalibrationError(f"Calibration repetition {repetition} failed: {e}", repetition=repetition) from e


def calibrate_step2_penalty(
    d: Dataset,
    step1: RegressorSpec,
    kind: StepTwoKind,
    m: int = CALIBRATION_M,
    alpha: float = CALIBRATION_ALPHA,
    seed: int = 0,
    min_leaf: int = MIN_LEAF,
    workers: int = 1,
) -> CalibrationResult:
    """
    Calibrate the step-2 penalty by permuting treatment labels.

    Each repetition draws its permutation and its step-1 seeds from streams
    derived from ``(seed, repetition)``, so results do not depend on ``workers``.

    Args:
        d: Trial data
        step1: Step-1 learner spec, refit in full for every permutation
        kind: Step-2 kind whose penalty is calibrated
        m: Number of permutations
        alpha: Target inclusion probability
        seed: Master seed
        min_leaf: Minimum leaf size used by the regression-tree penalty
        workers: Parallel workers (joblib)

    Returns:
        CalibrationResult

    Raises:
        SpecError: If m < 1, alpha is outside (0, 1) or kind is "none"
        CalibrationError: If any repetition fails (its index is attached)

    Example:
        >>> result = calibrate_step2_penalty(d, LassoSpec(), StepTwoKind.REGRESSION_TREE, m=20, alpha=0.1)
        >>> result.threshold == sorted(result.samples)[17]
        True
    """
    kind = StepTwoKind(kind)
    if m < 1:
        raise SpecError("Calibration needs at least one repetition", field="m", value=m)
    if not 0 < alpha < 1:
        raise SpecError("Calibration alpha must lie in (0, 1)", field="alpha", value=alpha)
    if kind is StepTwoKind.NONE:
        raise SpecError("Step-2 kind 'none' has no penalty", field="kind", value=kind)

    if workers > 1:
        samples: List[float] = Parallel(n_jobs=workers)(
            delayed(_null_repetition)(d, step1, kind, seed, r, min_leaf) for r in range(m)
        )
    else:
        samples = [_null_repetition(d, step1, kind, seed, r, min_leaf) for r in range(m)]

    values = np.asarray(samples, dtype=float)
    threshold = float(np.sort(values)[quantile_index(m, alpha)])
    logger.info(
        f"Calibrated {kind.value} penalty {threshold:.4g} from {m} permutations (alpha={alpha}); "
        f"null range {values.min():.4g}..{values.max():.4g}"
    )
    return CalibrationResult(threshold=threshold, samples=values, m=m, alpha=alpha, kind=kind)
