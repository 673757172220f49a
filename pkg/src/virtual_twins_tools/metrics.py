"""
Evaluation metrics for simulated replicates.

Three quantities are computed per replicate on the held-out test set: the
rate at which the estimated optimal arm matches the true one, the mean squared
error of the estimated individual treatment effects, and the set of covariates
the step-2 model uses. Across replicates the first two are averaged with
Monte-Carlo standard errors and the selections are pooled into a precision.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import FrozenSet, Iterable, List, Optional, Sequence, Set

import numpy as np

from .exceptions import ValidationError
from .simulation.generators import SimulatedData
from .subgroup.models import selected_variables
from .vt.engine import VtFit, estimated_effect

logger = logging.getLogger(__name__)


class GroundTruthMode(str, Enum):
    """Which outcomes define the true optimal arm."""

    REALIZED = "realized"
    NOISELESS = "noiseless"


@dataclass(frozen=True)
class ReplicateMetrics:
    """
    Metrics of one fitted replicate.

    Attributes:
        accuracy: Fraction of test rows whose estimated optimal arm is correct
        ite_mse: Mean squared error of the estimated effects against z_true
        selected: 0-based covariates used by the step-2 model
        n_eval: Number of test rows
        pooled: Whether ``selected`` counts towards pooled precision
    """

    accuracy: float
    ite_mse: float
    selected: FrozenSet[int] = field(default_factory=frozenset)
    n_eval: int = 0
    pooled: bool = True


@dataclass(frozen=True)
class AggregateMetrics:
    """
    Metrics of one benchmark cell aggregated over replicates.

    Attributes:
        mean_accuracy: Mean classification accuracy
        mc_se_accuracy: Monte-Carlo standard error of mean_accuracy
        mean_mse: Mean effect MSE
        mc_se_mse: Monte-Carlo standard error of mean_mse
        pooled_precision: Pooled selection precision (None when undefined)
        replicates: Number of replicates aggregated
    """

    mean_accuracy: float
    mc_se_accuracy: float
    mean_mse: float
    mc_se_mse: float
    pooled_precision: Optional[float]
    replicates: int


def _check_lengths(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if a.shape != b.shape:
        raise ValidationError(f"{what}: lengths differ ({a.shape[0]} vs {b.shape[0]})", field=what, value=a.shape)


def classification_accuracy(pred_arm: Sequence[int], truth_arm: Sequence[int]) -> float:
    """
    Fraction of rows where the predicted arm equals the true arm.

    Raises:
        ValidationError: If the vectors differ in length or are empty

    Example:
        >>> classification_accuracy([1, 0, 1], [1, 1, 1])
        0.6666666666666666
    """
    pred = np.asarray(pred_arm).ravel()
    truth = np.asarray(truth_arm).ravel()
    _check_lengths(pred, truth, "accuracy")
    if pred.size == 0:
        raise ValidationError("accuracy: no rows to evaluate", field="accuracy", value=0)
    return float(np.mean(pred == truth))


def ite_mse(z_hat: Sequence[float], z_true: Sequence[float]) -> float:
    """
    Mean squared error of estimated against true individual effects.

    Raises:
        ValidationError: If the vectors differ in length or are empty

    Example:
        >>> ite_mse([1.0, 2.0], [0.0, 0.0])
        2.5
    """
    est = np.asarray(z_hat, dtype=float).ravel()
    truth = np.asarray(z_true, dtype=float).ravel()
    _check_lengths(est, truth, "ite_mse")
    if est.size == 0:
        raise ValidationError("ite_mse: no rows to evaluate", field="ite_mse", value=0)
    return float(np.mean((est - truth) ** 2))


def pooled_selection_precision(selections: Iterable[Set[int]], truth: Set[int]) -> Optional[float]:
    """
    Pooled precision of variable selections against the true predictive set.

    Counts are pooled over replicates: sum of |selected ∩ truth| divided by the
    sum of |selected|.

    Args:
        selections: One selected set per replicate
        truth: True predictive variables

    Returns:
        Optional[float]: The pooled precision, or None when nothing was selected

    Example:
        >>> pooled_selection_precision([{0, 16}, {0, 98}], {0, 16, 17, 18, 19, 102, 103, 104})
        0.75
    """
    truth = set(truth)
    hits = 0
    total = 0
    for selected in selections:
        hits += len(set(selected) & truth)
        total += len(selected)
    if total == 0:
        return None
    return hits / total


def evaluate_replicate(
    fit: VtFit,
    sim: SimulatedData,
    ground_truth_mode: GroundTruthMode = GroundTruthMode.REALIZED,
) -> ReplicateMetrics:
    """
    Score a fitted pipeline on the test set of its replicate.

    The estimated effect comes from the step-2 model, or from the step-1
    difference when the step-2 kind is "none". The true effect is always the
    difference of conditional means; the true arm follows ``ground_truth_mode``.

    Args:
        fit: Pipeline fitted on ``sim.train``
        sim: Replicate supplying the test set and its truth
        ground_truth_mode: Realized potential outcomes or conditional means

    Returns:
        ReplicateMetrics: Accuracy, effect MSE and selected variables

    Raises:
        ColumnMismatchError: If the fit and the test set have different layouts
    """
    mode = GroundTruthMode(ground_truth_mode)
    truth = sim.test_truth
    z_hat = estimated_effect(fit, sim.test.X)
    pred_arm = (z_hat > 0).astype(np.int64)
    if mode is GroundTruthMode.REALIZED:
        truth_arm = truth.optimal_arm_realized
    else:
        truth_arm = truth.optimal_arm_noiseless

    return ReplicateMetrics(
        accuracy=classification_accuracy(pred_arm, truth_arm),
        ite_mse=ite_mse(z_hat, truth.z_true),
        selected=frozenset(selected_variables(fit.step2_model)),
        n_eval=sim.test.n,
        pooled=fit.step2_model is not None,
    )


def _mean_and_se(values: np.ndarray):
    mean = float(np.mean(values))
    if values.size < 2:
        return mean, 0.0
    return mean, float(np.std(values, ddof=1) / np.sqrt(values.size))


def aggregate_metrics(results: List[ReplicateMetrics], truth: Set[int]) -> AggregateMetrics:
    """
    Aggregate replicate metrics of one cell.

    Precision pools the replicates that have a step-2 model, and
    is None when the truth is empty or no variable was selected.

    Args:
        results: Metrics of the successful replicates
        truth: True predictive set of the scenario

    Returns:
        AggregateMetrics: Means, Monte-Carlo standard errors and pooled precision

    Raises:
        ValidationError: If ``results`` is empty
    """
    if not results:
        raise ValidationError("No replicate results to aggregate", field="results", value=0)
    accuracy = np.array([r.accuracy for r in results], dtype=float)
    mse = np.array([r.ite_mse for r in results], dtype=float)
    mean_accuracy, se_accuracy = _mean_and_se(accuracy)
    mean_mse, se_mse = _mean_and_se(mse)

    precision = None
    if truth:
        precision = pooled_selection_precision([r.selected for r in results if r.pooled], truth)
        if precision is None and any(r.pooled for r in results):
            logger.warning("No variables selected in any replicate; precision is undefined")

    return AggregateMetrics(
        mean_accuracy=mean_accuracy,
        mc_se_accuracy=se_accuracy,
        mean_mse=mean_mse,
        mc_se_mse=se_mse,
        pooled_precision=precision,
        replicates=len(results),
    )
