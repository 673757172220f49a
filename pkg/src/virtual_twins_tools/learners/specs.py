"""
Step-1 learner specifications.

A spec is a small frozen dataclass describing how to fit one response-surface
learner. Specs carry defaults only; fitted state lives in the fit objects of the
individual learner modules.
"""

from dataclasses import asdict, dataclass, field, fields
from enum import Enum
from typing import Any, Dict, Optional, Tuple, Union

from ..constants import (
    FOREST_N_TREES,
    FOREST_NODESIZE_GRID,
    LASSO_FOLDS,
    LASSO_N_LAMBDA,
    MARS_DEGREE,
    MARS_MAX_TERMS,
    SUPERLEARNER_FOLDS,
)
from ..exceptions import SpecError


class LambdaRule(str, Enum):
    """Cross-validated penalty choice for the LASSO."""

    LAMBDA_MIN = "lambda_min"
    LAMBDA_1SE = "lambda_1se"


@dataclass(frozen=True)
class LassoSpec:
    """
    LASSO with a cross-validated penalty.

    Attributes:
        folds: Number of cross-validation folds
        rule: Penalty choice rule (lambda_1se by default)
        n_lambda: Length of the log-spaced penalty path
        epsilon: Ratio of smallest to largest penalty (None: 1e-3 if n > p, else 1e-2)
        tol: Convergence tolerance, relative to the response variance
        max_iter: Maximum number of coordinate passes per penalty value
    """

    folds: int = LASSO_FOLDS
    rule: LambdaRule = LambdaRule.LAMBDA_1SE
    n_lambda: int = LASSO_N_LAMBDA
    epsilon: Optional[float] = None
    tol: float = 1e-7
    max_iter: int = 1000

    name = "lasso"

    def validate(self) -> None:
        if self.folds < 2:
            raise SpecError("LASSO folds must be at least 2", field="folds", value=self.folds)
        if self.n_lambda < 1:
            raise SpecError("n_lambda must be positive", field="n_lambda", value=self.n_lambda)
        if self.epsilon is not None and not 0 < self.epsilon < 1:
            raise SpecError("epsilon must lie in (0, 1)", field="epsilon", value=self.epsilon)
        if self.tol <= 0:
            raise SpecError("tol must be positive", field="tol", value=self.tol)
        if self.max_iter < 1:
            raise SpecError("max_iter must be positive", field="max_iter", value=self.max_iter)
        LambdaRule(self.rule)


@dataclass(frozen=True)
class ForestSpec:
    """
    Bootstrap forest of CART regression trees, tuned over (mtry, nodesize) by OOB error.

    Attributes:
        n_trees: Trees grown per grid point
        mtry_grid: Candidate features per split (None: floor(p/3), floor(sqrt(p)), floor(2p/3))
        nodesize_grid: Minimum size of a node that may still be split
        bootstrap: Resample rows per tree; without it the grid must hold one point
        tune_mtry: With no explicit mtry_grid, tune over the three-point default grid;
            when False use floor(p/3) only
    """

    n_trees: int = FOREST_N_TREES
    mtry_grid: Optional[Tuple[int, ...]] = None
    nodesize_grid: Tuple[int, ...] = FOREST_NODESIZE_GRID
    bootstrap: bool = True
    tune_mtry: bool = True

    name = "forest"

    def validate(self) -> None:
        if self.n_trees < 1:
            raise SpecError("n_trees must be at least 1", field="n_trees", value=self.n_trees)
        if self.mtry_grid is not None and (not self.mtry_grid or min(self.mtry_grid) < 1):
            raise SpecError("mtry_grid must be nonempty and positive", field="mtry_grid", value=self.mtry_grid)
        if not self.nodesize_grid or min(self.nodesize_grid) < 1:
            raise SpecError(
                "nodesize_grid must be nonempty and positive", field="nodesize_grid", value=self.nodesize_grid
            )


@dataclass(frozen=True)
class MarsSpec:
    """
    Multivariate adaptive regression splines.

    Attributes:
        max_terms: Maximum number of basis terms, intercept included
        degree: Maximum interaction degree of a term
        min_span: Knot spacing in observations (None: derived from n and p)
        end_span: Observations excluded from knots at each end (None: derived from p)
        threshold: Forward pass stops when the R-squared gain drops below this
    """

    max_terms: int = MARS_MAX_TERMS
    degree: int = MARS_DEGREE
    min_span: Optional[int] = None
    end_span: Optional[int] = None
    threshold: float = 1e-3

    name = "mars"

    def validate(self) -> None:
        if self.max_terms < 1:
            raise SpecError("max_terms must be at least 1", field="max_terms", value=self.max_terms)
        if self.degree < 1:
            raise SpecError("degree must be at least 1", field="degree", value=self.degree)
        if self.min_span is not None and self.min_span < 1:
            raise SpecError("min_span must be at least 1", field="min_span", value=self.min_span)
        if self.end_span is not None and self.end_span < 0:
            raise SpecError("end_span must be non-negative", field="end_span", value=self.end_span)


def default_candidates() -> Tuple["BaseSpec", ...]:
    """Default stacking library: LASSO, an untuned forest and MARS."""
    return (
        LassoSpec(),
        ForestSpec(nodesize_grid=(5,), tune_mtry=False),
        MarsSpec(),
    )


@dataclass(frozen=True)
class SuperLearnerSpec:
    """
    Cross-validated convex stacking of candidate learners.

    Attributes:
        candidates: Candidate learner specs (no nested SuperLearner)
        folds: Number of cross-validation folds
    """

    candidates: Tuple["BaseSpec", ...] = field(default_factory=default_candidates)
    folds: int = SUPERLEARNER_FOLDS

    name = "superlearner"

    def validate(self) -> None:
        if self.folds < 2:
            raise SpecError("SuperLearner folds must be at least 2", field="folds", value=self.folds)
        if not self.candidates:
            raise SpecError("SuperLearner needs at least one candidate", field="candidates", value=())
        for candidate in self.candidates:
            if isinstance(candidate, SuperLearnerSpec):
                raise SpecError("Nested SuperLearner candidates are not allowed", field="candidates")
            candidate.validate()


BaseSpec = Union[LassoSpec, ForestSpec, MarsSpec]
RegressorSpec = Union[LassoSpec, ForestSpec, MarsSpec, SuperLearnerSpec]

_SPEC_BY_NAME = {
    "lasso": LassoSpec,
    "forest": ForestSpec,
    "rf": ForestSpec,
    "mars": MarsSpec,
    "superlearner": SuperLearnerSpec,
    "sl": SuperLearnerSpec,
}


def _tupled(value: Any) -> Any:
    return tuple(value) if isinstance(value, list) else value


def regressor_spec_from_config(value: Union[str, Dict[str, Any]]) -> RegressorSpec:
    """
    Build a learner spec from a name or a config object.

    Args:
        value: A learner name ("lasso", "forest"/"rf", "mars", "superlearner"/"sl")
            or a mapping with a "kind" key plus spec fields

    Returns:
        RegressorSpec: The validated spec

    Raises:
        SpecError: On unknown names, unknown fields or invalid values

    Example:
        >>> regressor_spec_from_config({"kind": "forest", "n_trees": 200}).n_trees
        200
    """
    if isinstance(value, str):
        options: Dict[str, Any] = {"kind": value}
    elif isinstance(value, dict):
        options = dict(value)
    else:
        raise SpecError(f"Learner must be a name or an object, got {type(value).__name__}", field="step1", value=value)

    kind = str(options.pop("kind", "")).strip().lower()
    if kind not in _SPEC_BY_NAME:
        raise SpecError(f"Unknown step-1 learner: {kind!r}", field="step1", value=kind)
    cls = _SPEC_BY_NAME[kind]

    allowed = {f.name for f in fields(cls)}
    unknown = sorted(set(options) - allowed)
    if unknown:
        raise SpecError(f"Unknown field for {kind}: {unknown[0]}", field=unknown[0], value=options[unknown[0]])

    if cls is SuperLearnerSpec and "candidates" in options:
        options["candidates"] = tuple(regressor_spec_from_config(c) for c in options["candidates"])
    if cls is LassoSpec and "rule" in options:
        try:
            options["rule"] = LambdaRule(options["rule"])
        except ValueError as e:
            raise SpecError(f"Unknown LASSO rule: {options['rule']!r}", field="rule", value=options["rule"]) from e
    options = {k: _tupled(v) for k, v in options.items()}

    try:
        spec = cls(**options)
    except TypeError as e:
        raise SpecError(f"Invalid {kind} options: {e}", field="step1", value=value) from e
    spec.validate()
    return spec


def regressor_spec_to_config(spec: RegressorSpec) -> Dict[str, Any]:
    """Serialize a learner spec into the config-object form."""
    if isinstance(spec, SuperLearnerSpec):
        return {
            "kind": spec.name,
            "folds": spec.folds,
            "candidates": [regressor_spec_to_config(c) for c in spec.candidates],
        }
    payload = {"kind": spec.name}
    for key, value in asdict(spec).items():
        payload[key] = value.value if isinstance(value, Enum) else (list(value) if isinstance(value, tuple) else value)
    return payload
