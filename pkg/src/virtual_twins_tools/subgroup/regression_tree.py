"""
Regression tree on estimated treatment effects.

Splits maximize the decrease in sum of squared errors. A split is accepted only
if its decrease, relative to the root SSE, exceeds the complexity penalty. The
maximum depth is either tuned by repeated K-fold cross-validation or fixed.
"""

import logging
from typing import Callable, List, Optional, Tuple

import numpy as np
from sklearn.model_selection import RepeatedKFold

from ..exceptions import FitError, SpecError
from ..learners.cart import CartTree, TreeGrower, best_split, sse
from ..utils.seeding import make_rng
from .models import FixedPenalty, RepeatedCV, StepTwoKind, StepTwoSpec, TreeModel

logger = logging.getLogger(__name__)

TreeFactory = Callable[[np.ndarray, np.ndarray, int], CartTree]


def tune_depth(
    grow: TreeFactory,
    X: np.ndarray,
    z: np.ndarray,
    tuning: RepeatedCV,
    seed: int,
) -> Tuple[int, List[Tuple[int, float]]]:
    """
    Choose a maximum depth by repeated K-fold cross-validation.

    One tree is grown to the largest candidate depth per training fold; every
    candidate depth is evaluated by routing the held-out rows through the tree
    truncated at that depth. Ties go to the smallest depth.

    Args:
        grow: Grows a tree on (X, z) up to the given depth
        X: n×p covariates
        z: Length-n estimated effects
        tuning: Fold count, repeat count and depth grid
        seed: Seed for the fold assignment

    Returns:
        Tuple (chosen depth, [(depth, mean CV MSE), ...])
    """
    depths = sorted(set(int(d) for d in tuning.depth_grid))
    deepest = depths[-1]
    splitter = RepeatedKFold(
        n_splits=tuning.folds,
        n_repeats=tuning.repeats,
        random_state=int(make_rng(seed).integers(2**31 - 1)),
    )
    errors = np.zeros((tuning.folds * tuning.repeats, len(depths)))
    for split_index, (train, test) in enumerate(splitter.split(X)):
        tree = grow(X[train], z[train], deepest)
        for column, depth in enumerate(depths):
            residual = z[test] - tree.predict(X[test], max_depth=depth)
            errors[split_index, column] = np.mean(residual**2)

    mean_errors = errors.mean(axis=0)
    chosen = depths[int(np.argmin(mean_errors))]
    record = [(d, float(e)) for d, e in zip(depths, mean_errors)]
    logger.debug(f"Depth CV errors: {record}")
    return chosen, record


def check_step_two_inputs(X: np.ndarray, z: np.ndarray, spec: StepTwoSpec, learner: str) -> None:
    if X.ndim != 2 or X.shape[0] != z.shape[0]:
        raise FitError(f"Shapes do not match: X {X.shape}, z {z.shape}", learner=learner)
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(z))):
        raise FitError("Step-2 inputs contain non-finite values", learner=learner)
    if X.shape[0] < 2 * spec.min_leaf:
        raise FitError(
            f"Need at least {2 * spec.min_leaf} rows for min_leaf={spec.min_leaf}, got {X.shape[0]}",
            learner=learner,
        )


def grow_regression_tree(
    X: np.ndarray,
    z: np.ndarray,
    max_depth: int,
    min_leaf: int,
    penalty: float,
) -> CartTree:
    """
    Grow a variance-reduction tree with a relative-improvement penalty.

    A split is kept iff score / SSE_root > penalty, where SSE_root is the SSE
    of z over all rows given to this call.
    """
    root_sse = sse(z)
    features = np.arange(X.shape[1])

    def find_split(rows: np.ndarray, depth: int):
        if root_sse <= 0.0:
            return None
        split = best_split(X[rows], z[rows], features, min_leaf=min_leaf)
        if split is None or split.score / root_sse <= penalty:
            return None
        return split

    grower = TreeGrower(find_split, max_depth=max_depth, min_split=2 * min_leaf)
    return grower.grow(X, z)


def fit_regression_tree(
    X,
    z,
    spec: Optional[StepTwoSpec] = None,
    seed: int = 0,
    feature_names: Optional[Tuple[str, ...]] = None,
) -> TreeModel:
    """
    Fit a regression tree to estimated treatment effects.

    Under RepeatedCV the depth is tuned over ``depth_grid`` and splits must
    improve the root-relative error by more than ``complexity``. Under
    FixedPenalty the penalty value replaces the complexity and the depth is
    capped at ``max_depth``. A constant z gives a root-only tree.

    Args:
        X: n×p covariates
        z: Length-n estimated effects
        spec: Step-2 settings (default: RepeatedCV regression tree)
        seed: Seed for the CV folds
        feature_names: Covariate names stored for reports

    Returns:
        TreeModel: The fitted tree

    Raises:
        FitError: If n < 2 * min_leaf or inputs are not finite
        SpecError: If the tuning mode has not been resolved to CV or a fixed penalty

    Example:
        >>> model = fit_regression_tree(X, 3.0 * (X[:, 1] > 0.5), StepTwoSpec(), seed=1)
        >>> selected_variables(model)
        {1}
    """
    spec = spec or StepTwoSpec(kind=StepTwoKind.REGRESSION_TREE)
    spec.validate()
    X = np.asarray(X, dtype=float)
    z = np.asarray(z, dtype=float)
    check_step_two_inputs(X, z, spec, "regression_tree")

    tuning = spec.tuning
    cv_record: List[Tuple[int, float]] = []
    if isinstance(tuning, FixedPenalty):
        penalty = float(tuning.value)
        depth = spec.max_depth
    elif isinstance(tuning, RepeatedCV):
        penalty = float(spec.complexity)
        if sse(z) <= 0.0:
            depth = min(tuning.depth_grid)
        else:
            depth, cv_record = tune_depth(
                lambda Xf, zf, d: grow_regression_tree(Xf, zf, d, spec.min_leaf, penalty),
                X,
                z,
                tuning,
                seed,
            )
    else:
        raise SpecError("Permutation tuning must be resolved before fitting", field="tuning", value=tuning)

    if sse(z) <= 0.0:
        logger.warning("Estimated effects are constant; returning a root-only tree")

    tree = grow_regression_tree(X, z, depth, spec.min_leaf, penalty)
    logger.info(f"Regression tree: depth {tree.max_depth} (limit {depth}), {len(tree.leaves())} leaves")
    return TreeModel(
        tree=tree,
        kind=StepTwoKind.REGRESSION_TREE,
        penalty_used=penalty,
        max_depth=depth,
        feature_names=tuple(feature_names) if feature_names is not None else None,
        cv_depth_mse=tuple(cv_record),
    )


def root_improvement(X, z, min_leaf: int = 1) -> float:
    """
    Relative error improvement of the best root split, (SSE_root - SSE_best) / SSE_root.

    Returns 0 when z is constant or no split satisfies ``min_leaf``.
    """
    X = np.asarray(X, dtype=float)
    z = np.asarray(z, dtype=float)
    root_sse = sse(z)
    if root_sse <= 0.0:
        return 0.0
    split = best_split(X, z, np.arange(X.shape[1]), min_leaf=min_leaf)
    if split is None:
        return 0.0
    return max(float(split.score) / root_sse, 0.0)
