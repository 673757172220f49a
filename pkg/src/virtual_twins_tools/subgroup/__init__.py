"""Step-2 subgroup models: regression tree, conditional inference tree and sparse linear model."""

from .conditional_tree import fit_conditional_tree
from .fitting import fit_step_two
from .models import (
    FixedPenalty,
    PermutationCalibrated,
    RepeatedCV,
    SparseLinearModel,
    StepTwoKind,
    StepTwoSpec,
    SubgroupModel,
    TreeModel,
    TreeNode,
    parse_step_two_kind,
    predict_effect,
    selected_variables,
    step_two_spec_from_config,
    step_two_spec_to_config,
)
from .regression_tree import fit_regression_tree
from .sparse_linear import fit_sparse_linear, fit_sparse_linear_penalized

__all__ = [
    "FixedPenalty",
    "PermutationCalibrated",
    "RepeatedCV",
    "SparseLinearModel",
    "StepTwoKind",
    "StepTwoSpec",
    "SubgroupModel",
    "TreeModel",
    "TreeNode",
    "fit_conditional_tree",
    "fit_regression_tree",
    "fit_sparse_linear",
    "fit_sparse_linear_penalized",
    "fit_step_two",
    "parse_step_two_kind",
    "predict_effect",
    "selected_variables",
    "step_two_spec_from_config",
    "step_two_spec_to_config",
]
