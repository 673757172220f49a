"""
Sparse linear step-2 model.

Covariates are ranked by the order in which they enter a cross-validated LASSO
path for z; the top k are refit by ordinary least squares as main effects.
"""

import logging
from typing import Optional, Sequence

import numpy as np

from ..constants import LINEAR_K
from ..exceptions import FitError
from ..learners.lasso import fit_lasso, fit_lasso_at
from ..learners.specs import LassoSpec
from .models import SparseLinearModel

logger = logging.getLogger(__name__)


def ols_refit(X: np.ndarray, z: np.ndarray, columns: Sequence[int]):
    """
    Least-squares fit of z on an intercept plus the given columns.

    Returns:
        Tuple (intercept, coefficients)
    """
    columns = list(columns)
    if not columns:
        return float(z.mean()), np.zeros(0)
    design = np.column_stack([np.ones(X.shape[0]), X[:, columns]])
    coef, _, _, _ = np.linalg.lstsq(design, z, rcond=None)
    return float(coef[0]), np.asarray(coef[1:], dtype=float)


def entry_ranking(coef_path: np.ndarray, chosen_coefficients: np.ndarray) -> list:
    """
    Rank variables that ever enter a LASSO path.

    Ordered by the first path index at which the coefficient becomes nonzero,
    then by larger |coefficient| at the chosen penalty, then by lower index.
    """
    nonzero = coef_path != 0
    entered = np.flatnonzero(nonzero.any(axis=1))
    first = nonzero.argmax(axis=1)
    return sorted(entered.tolist(), key=lambda j: (int(first[j]), -abs(float(chosen_coefficients[j])), j))


def _check(X: np.ndarray, z: np.ndarray) -> None:
    if X.ndim != 2 or X.shape[0] != z.shape[0]:
        raise FitError(f"Shapes do not match: X {X.shape}, z {z.shape}", learner="linear")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(z))):
        raise FitError("Step-2 inputs contain non-finite values", learner="linear")


def fit_sparse_linear(
    X,
    z,
    k: int = LINEAR_K,
    folds: int = 10,
    seed: int = 0,
    binary_mask: Optional[np.ndarray] = None,
) -> SparseLinearModel:
    """
    Select k covariates by LASSO entry order and refit them by least squares.

    When fewer than k covariates ever enter the path, all entered covariates
    are used and ``shortfall`` is set.

    Args:
        X: n×p covariates
        z: Length-n estimated effects
        k: Number of covariates to keep
        folds: LASSO cross-validation folds
        seed: Seed for the LASSO folds
        binary_mask: Columns the LASSO leaves unscaled

    Returns:
        SparseLinearModel: The refit model

    Raises:
        FitError: If k > p, n <= k + 1, or inputs are not finite

    Example:
        >>> model = fit_sparse_linear(X, 2 * X[:, 0] + X[:, 1], k=2)
        >>> sorted(model.selected)
        [0, 1]
    """
    X = np.asarray(X, dtype=float)
    z = np.asarray(z, dtype=float)
    _check(X, z)
    n, p = X.shape
    if k < 0 or k > p:
        raise FitError(f"k must lie in [0, {p}], got {k}", learner="linear")
    if n <= k + 1:
        raise FitError(f"Need more than {k + 1} rows for k={k}, got {n}", learner="linear")

    if k == 0:
        return SparseLinearModel(
            selected=(), intercept=float(z.mean()), coefficients=np.zeros(0), n_features=p, requested_k=0
        )

    lasso = fit_lasso(X, z, LassoSpec(folds=folds), seed=seed, binary_mask=binary_mask)
    ranking = entry_ranking(lasso.coef_path, lasso.coefficients)
    selected = ranking[:k]
    shortfall = len(selected) < k
    if shortfall:
        logger.warning(f"Only {len(selected)} covariates entered the LASSO path; {k} requested")

    intercept, coefficients = ols_refit(X, z, selected)
    logger.info(f"Sparse linear model selected columns {selected}")
    return SparseLinearModel(
        selected=tuple(int(j) for j in selected),
        intercept=intercept,
        coefficients=coefficients,
        n_features=p,
        requested_k=k,
        shortfall=shortfall,
        penalty_used=lasso.lambda_chosen,
    )


def fit_sparse_linear_penalized(
    X,
    z,
    penalty: float,
    binary_mask: Optional[np.ndarray] = None,
) -> SparseLinearModel:
    """
    Fit the LASSO at a fixed penalty and refit its active set by least squares.

    Args:
        X: n×p covariates
        z: Length-n estimated effects
        penalty: Penalty on the standardized scale
        binary_mask: Columns the LASSO leaves unscaled

    Returns:
        SparseLinearModel: The refit model; intercept-only when the active set is empty
    """
    X = np.asarray(X, dtype=float)
    z = np.asarray(z, dtype=float)
    _check(X, z)
    _, coefficients = fit_lasso_at(X, z, penalty, binary_mask=binary_mask)
    active = sorted(np.flatnonzero(coefficients != 0).tolist(), key=lambda j: (-abs(coefficients[j]), j))
    if X.shape[0] <= len(active) + 1:
        raise FitError(f"Active set of {len(active)} is too large for {X.shape[0]} rows", learner="linear")
    intercept, refit = ols_refit(X, z, active)
    return SparseLinearModel(
        selected=tuple(int(j) for j in active),
        intercept=intercept,
        coefficients=refit,
        n_features=X.shape[1],
        requested_k=len(active),
        penalty_used=float(penalty),
    )
