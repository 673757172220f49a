"""
Conditional inference tree on estimated treatment effects.

Variable selection and cutpoint search are separated. At each node every
covariate is tested for linear association with z using the standardized
statistic c_j = |S_xz| / sqrt(S_xx * S_zz / (m - 1)), whose null distribution is
asymptotically standard normal. The node splits on the variable with the
largest statistic when its Bonferroni-adjusted two-sided p-value is at most
``alpha_split`` (or, under a fixed penalty, when the statistic reaches the
penalty). The cutpoint on that variable maximizes the standardized two-sample
difference in mean effect.
"""

import logging
from typing import Optional, Tuple

import numpy as np
from scipy.stats import norm

from ..exceptions import SpecError
from ..learners.cart import CartTree, Split, TreeGrower
from .models import FixedPenalty, RepeatedCV, StepTwoKind, StepTwoSpec, TreeModel
from .regression_tree import check_step_two_inputs, tune_depth

logger = logging.getLogger(__name__)


def association_statistics(X: np.ndarray, z: np.ndarray) -> np.ndarray:
    """
    Standardized linear association statistic of each column with z.

    Columns (or a z) with zero variance get statistic 0.

    Args:
        X: m×p covariates
        z: Length-m response

    Returns:
        numpy.ndarray: Length-p statistics, equal to sqrt(m - 1) * |corr(x_j, z)|
    """
    X = np.asarray(X, dtype=float)
    z = np.asarray(z, dtype=float)
    m = z.shape[0]
    if m < 2:
        return np.zeros(X.shape[1])
    zc = z - z.mean()
    Xc = X - X.mean(axis=0)
    s_zz = float(zc @ zc)
    s_xx = np.einsum("ij,ij->j", Xc, Xc)
    s_xz = Xc.T @ zc
    denominator = np.sqrt(s_xx * s_zz / (m - 1))
    with np.errstate(divide="ignore", invalid="ignore"):
        stats = np.where(denominator > 0, np.abs(s_xz) / np.where(denominator > 0, denominator, 1.0), 0.0)
    return stats


def adjusted_p_values(statistics: np.ndarray) -> np.ndarray:
    """Two-sided normal p-values with a Bonferroni adjustment over all columns."""
    raw = 2.0 * norm.sf(np.asarray(statistics, dtype=float))
    return np.minimum(1.0, raw * max(len(statistics), 1))


def best_cutpoint(x: np.ndarray, z: np.ndarray, min_leaf: int) -> Optional[Tuple[float, float]]:
    """
    Cutpoint on one variable maximizing the standardized two-sample statistic.

    The statistic of a cut is |sum of centered z on the left| divided by its
    permutation standard deviation sqrt(n_l * n_r / m * S_zz / (m - 1)). Ties go
    to the smallest threshold.

    Returns:
        Tuple (threshold, SSE decrease) or None if no cut leaves min_leaf rows per side
    """
    m = z.shape[0]
    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    zc = z - z.mean()
    s_zz = float(zc @ zc)
    if m < 2 or s_zz <= 0.0:
        return None

    left_sum = np.cumsum(zc[order])[:-1]
    n_left = np.arange(1, m, dtype=float)
    n_right = m - n_left
    valid = (xs[1:] > xs[:-1]) & (n_left >= min_leaf) & (n_right >= min_leaf)
    if not valid.any():
        return None
    scale = np.sqrt(n_left * n_right / m * s_zz / (m - 1))
    stats = np.where(valid, np.abs(left_sum) / scale, -np.inf)
    k = int(np.argmax(stats))
    threshold = 0.5 * (xs[k] + xs[k + 1])
    decrease = left_sum[k] ** 2 / n_left[k] + left_sum[k] ** 2 / n_right[k]
    return float(threshold), float(decrease)


def grow_conditional_tree(
    X: np.ndarray,
    z: np.ndarray,
    max_depth: int,
    min_leaf: int,
    alpha_split: float,
    statistic_threshold: Optional[float] = None,
) -> CartTree:
    """
    Grow a conditional inference tree.

    With ``statistic_threshold`` set, a node splits iff its largest statistic is
    at least that value; otherwise iff the adjusted p-value is at most
    ``alpha_split``.
    """

    def find_split(rows: np.ndarray, depth: int) -> Optional[Split]:
        node_X = X[rows]
        node_z = z[rows]
        stats = association_statistics(node_X, node_z)
        if stats.size == 0:
            return None
        j = int(np.argmax(stats))
        if not stats[j] > 0.0:
            return None
        p_values = adjusted_p_values(stats)
        if statistic_threshold is not None:
            if stats[j] < statistic_threshold:
                return None
        elif p_values[j] > alpha_split:
            return None

        cut = best_cutpoint(node_X[:, j], node_z, min_leaf)
        if cut is None:
            return None
        threshold, decrease = cut
        return Split(feature=j, threshold=threshold, score=decrease, p_value=float(p_values[j]), statistic=float(stats[j]))

    grower = TreeGrower(find_split, max_depth=max_depth, min_split=2 * min_leaf)
    return grower.grow(X, z)


def fit_conditional_tree(
    X,
    z,
    spec: Optional[StepTwoSpec] = None,
    seed: int = 0,
    feature_names: Optional[Tuple[str, ...]] = None,
) -> TreeModel:
    """
    Fit a conditional inference tree to estimated treatment effects.

    Under RepeatedCV the maximum depth is tuned over ``depth_grid`` with the
    significance gate ``alpha_split`` at every node. Under FixedPenalty the
    penalty is a threshold on the largest standardized statistic and the depth
    is capped at ``max_depth``.

    Args:
        X: n×p covariates
        z: Length-n estimated effects
        spec: Step-2 settings (default: RepeatedCV conditional tree)
        seed: Seed for the CV folds
        feature_names: Covariate names stored for reports

    Returns:
        TreeModel: The fitted tree

    Raises:
        FitError: If n < 2 * min_leaf or inputs are not finite
        SpecError: If the tuning mode has not been resolved to CV or a fixed penalty
    """
    spec = spec or StepTwoSpec(kind=StepTwoKind.CONDITIONAL_TREE)
    spec.validate()
    X = np.asarray(X, dtype=float)
    z = np.asarray(z, dtype=float)
    check_step_two_inputs(X, z, spec, "conditional_tree")

    tuning = spec.tuning
    cv_record = []
    if isinstance(tuning, FixedPenalty):
        threshold: Optional[float] = float(tuning.value)
        penalty_used = threshold
        depth = spec.max_depth
    elif isinstance(tuning, RepeatedCV):
        threshold = None
        penalty_used = float(spec.alpha_split)
        depth, cv_record = tune_depth(
            lambda Xf, zf, d: grow_conditional_tree(Xf, zf, d, spec.min_leaf, spec.alpha_split),
            X,
            z,
            tuning,
            seed,
        )
    else:
        raise SpecError("Permutation tuning must be resolved before fitting", field="tuning", value=tuning)

    tree = grow_conditional_tree(X, z, depth, spec.min_leaf, spec.alpha_split, threshold)
    if tree.node_count > 1:
        logger.info(
            f"Conditional tree: root split on column {int(tree.feature[0])} "
            f"(adjusted p={tree.p_value[0]:.3g}), {len(tree.leaves())} leaves"
        )
    else:
        logger.info("Conditional tree: no significant association at the root")
    return TreeModel(
        tree=tree,
        kind=StepTwoKind.CONDITIONAL_TREE,
        penalty_used=penalty_used,
        max_depth=depth,
        feature_names=tuple(feature_names) if feature_names is not None else None,
        cv_depth_mse=tuple(cv_record),
    )


def max_root_statistic(X, z) -> float:
    """Largest root association statistic over all columns (0 for constant z)."""
    stats = association_statistics(np.asarray(X, dtype=float), np.asarray(z, dtype=float))
    return float(stats.max()) if stats.size else 0.0
