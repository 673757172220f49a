"""Dispatch of a StepTwoSpec to its step-2 model."""

import logging
from dataclasses import replace
from typing import Optional, Sequence

import numpy as np

from ..exceptions import SpecError
from .conditional_tree import fit_conditional_tree
from .models import FixedPenalty, PermutationCalibrated, StepTwoKind, StepTwoSpec, SubgroupModel
from .regression_tree import fit_regression_tree
from .sparse_linear import fit_sparse_linear, fit_sparse_linear_penalized

logger = logging.getLogger(__name__)


def fit_step_two(
    X,
    z,
    spec: StepTwoSpec,
    seed: int = 0,
    binary_mask: Optional[np.ndarray] = None,
    feature_names: Optional[Sequence[str]] = None,
) -> Optional[SubgroupModel]:
    """
    Fit the step-2 model described by ``spec`` on (X, z).

    For the linear kind under cross-validated tuning, k is ``linear_k`` when
    set, otherwise the number of distinct variables selected by a companion
    regression tree fitted with the same settings.

    Args:
        X: n×p covariates
        z: Length-n estimated effects
        spec: Step-2 settings; permutation tuning must already be resolved
        seed: Seed for CV folds
        binary_mask: Columns the LASSO leaves unscaled
        feature_names: Covariate names stored on trees

    Returns:
        Optional[SubgroupModel]: None for kind "none", otherwise the fitted model

    Raises:
        SpecError: If the spec still carries PermutationCalibrated tuning
    """
    spec.validate()
    kind = StepTwoKind(spec.kind)
    if kind is StepTwoKind.NONE:
        return None
    if isinstance(spec.tuning, PermutationCalibrated):
        raise SpecError("Permutation tuning must be resolved before fitting", field="tuning", value=spec.tuning)

    names = tuple(feature_names) if feature_names is not None else None
    if kind is StepTwoKind.REGRESSION_TREE:
        return fit_regression_tree(X, z, spec, seed=seed, feature_names=names)
    if kind is StepTwoKind.CONDITIONAL_TREE:
        return fit_conditional_tree(X, z, spec, seed=seed, feature_names=names)

    if isinstance(spec.tuning, FixedPenalty):
        return fit_sparse_linear_penalized(X, z, spec.tuning.value, binary_mask=binary_mask)
    k = spec.linear_k
    if k is None:
        companion = fit_regression_tree(
            X, z, replace(spec, kind=StepTwoKind.REGRESSION_TREE), seed=seed, feature_names=names
        )
        k = len(set(companion.tree.split_features()))
        logger.info(f"Linear step-2 uses k={k} from the companion regression tree")
    return fit_sparse_linear(X, z, k, folds=spec.lasso_folds, seed=seed, binary_mask=binary_mask)
