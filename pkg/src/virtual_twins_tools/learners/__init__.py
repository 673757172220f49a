"""Step-1 response-surface learners behind a single fit/predict contract."""

from .base import CallableRegressor, FittedRegressor, fit_regressor, predict
from .forest import ForestFit, fit_forest
from .lasso import LassoFit, fit_lasso, fit_lasso_at, lambda_max
from .mars import MarsFit, fit_mars
from .specs import (
    ForestSpec,
    LambdaRule,
    LassoSpec,
    MarsSpec,
    RegressorSpec,
    SuperLearnerSpec,
    regressor_spec_from_config,
    regressor_spec_to_config,
)
from .stacking import StackFit, fit_superlearner

__all__ = [
    "CallableRegressor",
    "FittedRegressor",
    "ForestFit",
    "ForestSpec",
    "LambdaRule",
    "LassoFit",
    "LassoSpec",
    "MarsFit",
    "MarsSpec",
    "RegressorSpec",
    "StackFit",
    "SuperLearnerSpec",
    "fit_forest",
    "fit_lasso",
    "fit_lasso_at",
    "fit_mars",
    "fit_regressor",
    "fit_superlearner",
    "lambda_max",
    "predict",
    "regressor_spec_from_config",
    "regressor_spec_to_config",
]
