"""
Step-2 specifications and fitted subgroup models.

A step-2 model maps covariates to the estimated individual treatment effects
produced by step 1. Trees describe subgroups by their splits; the sparse linear
model describes effect modification by a handful of main effects.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterator, List, Optional, Set, Tuple, Union

import numpy as np

from ..constants import (
    ALPHA_SPLIT,
    CALIBRATION_ALPHA,
    CALIBRATION_M,
    CV_FOLDS,
    CV_REPEATS,
    DEPTH_GRID,
    LASSO_FOLDS,
    MIN_LEAF,
    TREE_COMPLEXITY,
)
from ..exceptions import ColumnMismatchError, SpecError
from ..learners.cart import LEAF, CartTree, Split, TreeBuilder

logger = logging.getLogger(__name__)


class StepTwoKind(str, Enum):
    """Kind of step-2 model."""

    NONE = "none"
    LINEAR = "linear"
    REGRESSION_TREE = "regression_tree"
    CONDITIONAL_TREE = "conditional_tree"

    @property
    def label(self) -> str:
        """Short name used in tables and file names."""
        return _LABELS[self]


_LABELS = {
    StepTwoKind.NONE: "none",
    StepTwoKind.LINEAR: "linear",
    StepTwoKind.REGRESSION_TREE: "rtree",
    StepTwoKind.CONDITIONAL_TREE: "ctree",
}

_KIND_ALIASES = {
    "none": StepTwoKind.NONE,
    "linear": StepTwoKind.LINEAR,
    "lm": StepTwoKind.LINEAR,
    "rtree": StepTwoKind.REGRESSION_TREE,
    "regression_tree": StepTwoKind.REGRESSION_TREE,
    "ctree": StepTwoKind.CONDITIONAL_TREE,
    "conditional_tree": StepTwoKind.CONDITIONAL_TREE,
}


def parse_step_two_kind(name: str) -> StepTwoKind:
    """
    Resolve a step-2 name or alias.

    Raises:
        SpecError: If the name is unknown
    """
    key = str(name).strip().lower()
    if key not in _KIND_ALIASES:
        raise SpecError(f"Unknown step-2 model: {name!r}", field="step2", value=name)
    return _KIND_ALIASES[key]


@dataclass(frozen=True)
class RepeatedCV:
    """Tune tree depth by repeated K-fold cross-validation of the MSE on z."""

    folds: int = CV_FOLDS
    repeats: int = CV_REPEATS
    depth_grid: Tuple[int, ...] = DEPTH_GRID


@dataclass(frozen=True)
class FixedPenalty:
    """
    Use one fixed penalty instead of tuning.

    Regression trees accept a split only if it improves the root-relative error
    by more than ``value``; conditional trees split only if the largest
    standardized statistic reaches ``value``; the linear model is a LASSO at
    penalty ``value`` refit by least squares.
    """

    value: float


@dataclass(frozen=True)
class PermutationCalibrated:
    """
    Calibrate a FixedPenalty by permuting treatment labels.

    Attributes:
        m: Number of permutation repetitions
        alpha: The penalty is the (1 - alpha) quantile of the null penalties
    """

    m: int = CALIBRATION_M
    alpha: float = CALIBRATION_ALPHA


Tuning = Union[RepeatedCV, FixedPenalty, PermutationCalibrated]


@dataclass(frozen=True)
class StepTwoSpec:
    """
    Settings of the step-2 model.

    Attributes:
        kind: Which model to fit on (X, z)
        tuning: RepeatedCV, FixedPenalty or PermutationCalibrated
        min_leaf: Minimum rows per tree leaf
        alpha_split: Significance level of the conditional-tree split test
        complexity: Minimum root-relative error improvement of a regression-tree split under RepeatedCV
        max_depth: Depth cap when the depth is not tuned
        linear_k: Number of linear-model predictors (None: taken from a companion regression tree)
        lasso_folds: CV folds of the LASSO that ranks linear-model predictors

    Example:
        >>> spec = StepTwoSpec(kind=StepTwoKind.REGRESSION_TREE, tuning=FixedPenalty(0.05))
        >>> spec.validate()
    """

    kind: StepTwoKind = StepTwoKind.REGRESSION_TREE
    tuning: Tuning = field(default_factory=RepeatedCV)
    min_leaf: int = MIN_LEAF
    alpha_split: float = ALPHA_SPLIT
    complexity: float = TREE_COMPLEXITY
    max_depth: int = max(DEPTH_GRID)
    linear_k: Optional[int] = None
    lasso_folds: int = LASSO_FOLDS

    def validate(self) -> None:
        """
        Validate the spec.

        Raises:
            SpecError: If any field is out of range
        """
        StepTwoKind(self.kind)
        if self.min_leaf < 1:
            raise SpecError("min_leaf must be at least 1", field="min_leaf", value=self.min_leaf)
        if not 0 < self.alpha_split <= 1:
            raise SpecError("alpha_split must lie in (0, 1]", field="alpha_split", value=self.alpha_split)
        if self.complexity < 0:
            raise SpecError("complexity must be non-negative", field="complexity", value=self.complexity)
        if self.max_depth < 0:
            raise SpecError("max_depth must be non-negative", field="max_depth", value=self.max_depth)
        if self.linear_k is not None and self.linear_k < 0:
            raise SpecError("linear_k must be non-negative", field="linear_k", value=self.linear_k)
        if self.lasso_folds < 2:
            raise SpecError("lasso_folds must be at least 2", field="lasso_folds", value=self.lasso_folds)

        tuning = self.tuning
        if isinstance(tuning, RepeatedCV):
            if not tuning.depth_grid or min(tuning.depth_grid) < 0:
                raise SpecError("depth_grid must be nonempty and non-negative", field="depth_grid", value=tuning.depth_grid)
            if tuning.folds < 2 or tuning.repeats < 1:
                raise SpecError("RepeatedCV needs folds >= 2 and repeats >= 1", field="tuning", value=tuning)
        elif isinstance(tuning, FixedPenalty):
            if not np.isfinite(tuning.value) or tuning.value < 0:
                raise SpecError("Fixed penalty must be finite and non-negative", field="penalty", value=tuning.value)
        elif isinstance(tuning, PermutationCalibrated):
            if tuning.m < 1:
                raise SpecError("Calibration needs at least one repetition", field="m", value=tuning.m)
            if not 0 < tuning.alpha < 1:
                raise SpecError("Calibration alpha must lie in (0, 1)", field="alpha", value=tuning.alpha)
        else:
            raise SpecError(f"Unknown tuning mode: {type(tuning).__name__}", field="tuning", value=tuning)

    @property
    def label(self) -> str:
        """Short name used in tables, with a suffix for non-default tuning."""
        label = StepTwoKind(self.kind).label
        if self.kind is StepTwoKind.NONE:
            return label
        if isinstance(self.tuning, FixedPenalty):
            return f"{label}@{self.tuning.value:g}"
        if isinstance(self.tuning, PermutationCalibrated):
            return f"{label}+perm"
        return label


def step_two_spec_from_config(value: Union[str, Dict[str, Any]]) -> StepTwoSpec:
    """
    Build a step-2 spec from a name or a config object.

    Object keys: ``kind`` plus any StepTwoSpec field; ``tuning`` is either
    ``{"mode": "cv", "folds", "repeats", "depth_grid"}``,
    ``{"mode": "fixed", "value"}`` or ``{"mode": "permutation", "m", "alpha"}``.

    Raises:
        SpecError: On unknown names, unknown keys or invalid values

    Example:
        >>> step_two_spec_from_config({"kind": "ctree", "alpha_split": 0.1}).alpha_split
        0.1
    """
    if isinstance(value, str):
        options: Dict[str, Any] = {"kind": value}
    elif isinstance(value, dict):
        options = dict(value)
    else:
        raise SpecError(f"Step-2 model must be a name or an object, got {type(value).__name__}", field="step2")

    options["kind"] = parse_step_two_kind(options.get("kind", ""))
    tuning = options.pop("tuning", None)
    if tuning is not None:
        options["tuning"] = _tuning_from_config(tuning)

    allowed = set(StepTwoSpec.__dataclass_fields__)
    unknown = sorted(set(options) - allowed)
    if unknown:
        raise SpecError(f"Unknown step-2 field: {unknown[0]}", field=unknown[0], value=options[unknown[0]])
    try:
        spec = StepTwoSpec(**options)
    except TypeError as e:
        raise SpecError(f"Invalid step-2 options: {e}", field="step2", value=value) from e
    spec.validate()
    return spec


def _tuning_from_config(value: Dict[str, Any]) -> Tuning:
    if not isinstance(value, dict):
        raise SpecError("tuning must be an object", field="tuning", value=value)
    options = dict(value)
    mode = str(options.pop("mode", "cv")).lower()
    try:
        if mode in ("cv", "repeated_cv"):
            if "depth_grid" in options:
                options["depth_grid"] = tuple(int(d) for d in options["depth_grid"])
            return RepeatedCV(**options)
        if mode in ("fixed", "fixed_penalty"):
            return FixedPenalty(value=float(options["value"]))
        if mode in ("permutation", "calibrated"):
            return PermutationCalibrated(**options)
    except (TypeError, KeyError, ValueError) as e:
        raise SpecError(f"Invalid tuning options: {e}", field="tuning", value=value) from e
    raise SpecError(f"Unknown tuning mode: {mode!r}", field="tuning", value=mode)


def step_two_spec_to_config(spec: StepTwoSpec) -> Dict[str, Any]:
    """Serialize a step-2 spec into the config-object form."""
    tuning = spec.tuning
    if isinstance(tuning, RepeatedCV):
        tuning_payload = {
            "mode": "cv",
            "folds": tuning.folds,
            "repeats": tuning.repeats,
            "depth_grid": list(tuning.depth_grid),
        }
    elif isinstance(tuning, FixedPenalty):
        tuning_payload = {"mode": "fixed", "value": tuning.value}
    else:
        tuning_payload = {"mode": "permutation", "m": tuning.m, "alpha": tuning.alpha}
    return {
        "kind": StepTwoKind(spec.kind).value,
        "tuning": tuning_payload,
        "min_leaf": spec.min_leaf,
        "alpha_split": spec.alpha_split,
        "complexity": spec.complexity,
        "max_depth": spec.max_depth,
        "linear_k": spec.linear_k,
        "lasso_folds": spec.lasso_folds,
    }


@dataclass
class TreeNode:
    """
    Linked view of one tree node, used for export and reports.

    Leaves have ``variable is None`` and no children.
    """

    id: int
    count: int
    mean: float
    depth: int
    variable: Optional[int] = None
    threshold: Optional[float] = None
    score: Optional[float] = None
    p_value: Optional[float] = None
    statistic: Optional[float] = None
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.variable is None

    def walk(self) -> Iterator["TreeNode"]:
        """Yield this node and its descendants in preorder."""
        yield self
        if not self.is_leaf:
            yield from self.left.walk()
            yield from self.right.walk()


def _optional(value: float) -> Optional[float]:
    return None if np.isnan(value) else float(value)


@dataclass(frozen=True)
class TreeModel:
    """
    Fitted step-2 tree.

    Attributes:
        tree: Array-backed tree (rows with x <= threshold go left)
        kind: Regression or conditional tree
        penalty_used: Complexity, statistic threshold or calibrated penalty in force
        max_depth: Depth limit the tree was grown under
        feature_names: Covariate names for reports (optional)
        cv_depth_mse: Mean CV error per candidate depth, when depth was tuned
    """

    tree: CartTree
    kind: StepTwoKind
    penalty_used: float
    max_depth: int
    feature_names: Optional[Tuple[str, ...]] = None
    cv_depth_mse: Tuple[Tuple[int, float], ...] = ()

    @property
    def n_features(self) -> int:
        return self.tree.n_features

    @property
    def depth(self) -> int:
        return self.tree.max_depth

    @property
    def root(self) -> TreeNode:
        """Linked-node view of the tree."""
        tree = self.tree

        def build(node: int) -> TreeNode:
            view = TreeNode(
                id=node,
                count=int(tree.count[node]),
                mean=float(tree.value[node]),
                depth=int(tree.depth[node]),
            )
            if tree.feature[node] != LEAF:
                view.variable = int(tree.feature[node])
                view.threshold = float(tree.threshold[node])
                view.score = _optional(tree.score[node])
                view.p_value = _optional(tree.p_value[node])
                view.statistic = _optional(tree.statistic[node])
                view.left = build(int(tree.left[node]))
                view.right = build(int(tree.right[node]))
            return view

        return build(0)

    @classmethod
    def from_root(
        cls,
        root: TreeNode,
        n_features: int,
        kind: StepTwoKind,
        penalty_used: float,
        max_depth: int,
        feature_names: Optional[Tuple[str, ...]] = None,
    ) -> "TreeModel":
        """Rebuild a TreeModel from a linked-node view, renumbering nodes in preorder."""
        builder = TreeBuilder()

        def copy(node: TreeNode, depth: int) -> int:
            node_id = builder.add(value=node.mean, count=node.count, depth=depth)
            if not node.is_leaf:
                left = copy(node.left, depth + 1)
                right = copy(node.right, depth + 1)
                split = Split(
                    feature=int(node.variable),
                    threshold=float(node.threshold),
                    score=float("nan") if node.score is None else float(node.score),
                    p_value=float("nan") if node.p_value is None else float(node.p_value),
                    statistic=float("nan") if node.statistic is None else float(node.statistic),
                )
                builder.set_split(node_id, split, left, right)
            return node_id

        copy(root, 0)
        return cls(
            tree=builder.build(n_features),
            kind=StepTwoKind(kind),
            penalty_used=float(penalty_used),
            max_depth=int(max_depth),
            feature_names=tuple(feature_names) if feature_names is not None else None,
        )

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.tree.predict(X)

    def leaf_rules(self) -> List[Tuple[int, List[Tuple[int, str, float]]]]:
        """
        Conditions defining each leaf, in preorder.

        Returns:
            List of (leaf id, [(variable, "<=" or ">", threshold), ...])
        """
        rules: List[Tuple[int, List[Tuple[int, str, float]]]] = []

        def visit(node: TreeNode, path: List[Tuple[int, str, float]]) -> None:
            if node.is_leaf:
                rules.append((node.id, list(path)))
                return
            visit(node.left, path + [(node.variable, "<=", node.threshold)])
            visit(node.right, path + [(node.variable, ">", node.threshold)])

        visit(self.root, [])
        return rules


@dataclass(frozen=True)
class SparseLinearModel:
    """
    Least-squares refit of z on a few covariates chosen by the LASSO.

    Attributes:
        selected: Selected column indices in ranking order
        intercept: Intercept of the refit
        coefficients: One coefficient per selected column
        n_features: Number of training columns
        requested_k: Number of predictors asked for
        shortfall: True when fewer than ``requested_k`` variables ever entered the LASSO path
        penalty_used: LASSO penalty that produced the ranking or active set
    """

    selected: Tuple[int, ...]
    intercept: float
    coefficients: np.ndarray
    n_features: int
    requested_k: int
    shortfall: bool = False
    penalty_used: float = float("nan")

    @property
    def k(self) -> int:
        return len(self.selected)

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if not self.selected:
            return np.full(X.shape[0], self.intercept)
        return self.intercept + X[:, list(self.selected)] @ self.coefficients


SubgroupModel = Union[TreeModel, SparseLinearModel]


def selected_variables(model: Optional[SubgroupModel]) -> Set[int]:
    """
    Variables a step-2 model uses.

    Args:
        model: Fitted tree or sparse linear model (None for step-2 "none")

    Returns:
        Set[int]: Split variables of a tree, or the selected columns of a linear model

    Example:
        >>> selected_variables(None)
        set()
    """
    if model is None:
        return set()
    if isinstance(model, TreeModel):
        return set(model.tree.split_features())
    return set(int(j) for j in model.selected)


def predict_effect(model: SubgroupModel, X) -> np.ndarray:
    """
    Predicted treatment effect per row.

    Trees return the mean effect of the leaf a row is routed to; the linear
    model returns its linear predictor.

    Raises:
        ColumnMismatchError: If X does not have the training column count
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.shape[1] != model.n_features:
        raise ColumnMismatchError(
            f"Expected {model.n_features} columns, got {X.shape[1]}",
            expected=model.n_features,
            got=X.shape[1],
        )
    return model.predict(X)
