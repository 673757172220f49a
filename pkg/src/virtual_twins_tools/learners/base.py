"""
Common fit/predict contract for step-1 learners.

Every fitted learner exposes ``n_features`` and ``predict(X)``. The module-level
``predict`` adds the column-layout check and the finiteness guarantee, and
``fit_regressor`` dispatches a spec to its learner.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from ..exceptions import ColumnMismatchError, FitError, SpecError
from .forest import ForestFit, fit_forest
from .lasso import LassoFit, fit_lasso
from .mars import MarsFit, fit_mars
from .specs import ForestSpec, LassoSpec, MarsSpec, RegressorSpec, SuperLearnerSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CallableRegressor:
    """
    Wrap a plain function of the covariate matrix as a fitted regressor.

    Used to inject known response surfaces, e.g. the true conditional means of a
    simulation, in place of a learned model.

    Attributes:
        function: Maps an m×p matrix to a length-m vector
        n_features: Expected number of columns (None disables the layout check)
        label: Name shown in logs and reports
    """

    function: Callable[[np.ndarray], np.ndarray]
    n_features: Optional[int] = None
    label: str = "callable"

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(self.function(np.asarray(X, dtype=float)), dtype=float).ravel()


FittedRegressor = Union[LassoFit, ForestFit, MarsFit, "StackFit", CallableRegressor]


def fit_regressor(
    spec: RegressorSpec,
    X,
    y,
    seed: int = 0,
    binary_mask: Optional[np.ndarray] = None,
) -> FittedRegressor:
    """
    Fit the learner described by ``spec``.

    Args:
        spec: Learner spec
        X: n×p covariates
        y: Length-n response
        seed: Seed for all randomness inside the fit
        binary_mask: Columns the LASSO leaves unscaled

    Returns:
        FittedRegressor: The fitted model

    Raises:
        SpecError: If the spec type is unknown
        FitError: If fitting fails
    """
    if isinstance(spec, LassoSpec):
        return fit_lasso(X, y, spec, seed=seed, binary_mask=binary_mask)
    if isinstance(spec, ForestSpec):
        return fit_forest(X, y, spec, seed=seed)
    if isinstance(spec, MarsSpec):
        return fit_mars(X, y, spec, seed=seed)
    if isinstance(spec, SuperLearnerSpec):
        from .stacking import fit_superlearner

        return fit_superlearner(X, y, spec, seed=seed, binary_mask=binary_mask)
    raise SpecError(f"Unknown learner spec: {type(spec).__name__}", field="step1", value=spec)


def predict(f: FittedRegressor, X) -> np.ndarray:
    """
    Predict with a fitted regressor after checking the column layout.

    Args:
        f: Fitted regressor
        X: m×p covariates with the training layout

    Returns:
        numpy.ndarray: Length-m predictions

    Raises:
        ColumnMismatchError: If X has a different number of columns than the training data
        FitError: If the model produces non-finite predictions

    Example:
        >>> predict(CallableRegressor(lambda X: X[:, 0] * 2, n_features=1), np.ones((3, 1)))
        array([2., 2., 2.])
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    expected = getattr(f, "n_features", None)
    if expected is not None and X.shape[1] != expected:
        raise ColumnMismatchError(
            f"Expected {expected} columns, got {X.shape[1]}",
            expected=expected,
            got=X.shape[1],
        )
    predictions = f.predict(X)
    if predictions.shape != (X.shape[0],):
        raise FitError(f"Prediction has shape {predictions.shape}, expected ({X.shape[0]},)")
    if not np.all(np.isfinite(predictions)):
        raise FitError(f"{type(f).__name__} produced non-finite predictions")
    return predictions
