"""
Virtual Twins analysis of a trial CSV.

Loads the data, optionally calibrates the step-2 penalty by permutation, runs
both steps, and summarizes the subgroups: each tree leaf with its defining
rule, size and mean estimated effect, or (for the linear and "none" step-2
models) the rows with positive and non-positive estimated effect.
"""

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from ..constants import DEFAULT_OUTCOME_COLUMN, DEFAULT_TREATMENT_COLUMN, TREES_DIR
from ..data import CsvSchema, Dataset, infer_schema, load_csv
from ..subgroup.models import PermutationCalibrated, SparseLinearModel, TreeModel, selected_variables
from ..utils.file_ops import ensure_directory_exists, write_file_safe
from ..vt.engine import VtFit, VtSpec, estimated_effect, run_vt
from .export import write_tree

logger = logging.getLogger(__name__)

REPORT_FILE = "report.md"


@dataclass(frozen=True)
class Subgroup:
    """
    One subgroup of the analysed trial.

    Attributes:
        rule: Human-readable condition defining the subgroup
        size: Number of rows in the subgroup
        mean_effect: Mean estimated treatment effect of its rows
    """

    rule: str
    size: int
    mean_effect: float


@dataclass
class AnalysisReport:
    """
    Result of analysing one dataset.

    Attributes:
        source: Analysed CSV file
        dataset: Loaded data
        fit: Fitted pipeline
        subgroups: Subgroups in tree preorder (or positive/non-positive effect groups)
        selected: Names of the covariates the step-2 model uses
    """

    source: Path
    dataset: Dataset
    fit: VtFit
    subgroups: List[Subgroup] = field(default_factory=list)
    selected: List[str] = field(default_factory=list)

    @property
    def tree(self) -> Optional[TreeModel]:
        model = self.fit.step2_model
        return model if isinstance(model, TreeModel) else None


def _rule_text(conditions, names: List[str]) -> str:
    if not conditions:
        return "all"
    return " and ".join(f"{names[j]} {op} {t:.4g}" for j, op, t in conditions)


def subgroups_of(fit: VtFit, d: Dataset) -> List[Subgroup]:
    """
    Subgroups implied by a fitted pipeline on its training data.

    Tree leaves carry their training counts and mean estimated effects. Other
    step-2 models split rows by the sign of their estimated effect; empty
    groups are omitted.
    """
    model = fit.step2_model
    names = d.feature_names
    if isinstance(model, TreeModel):
        tree = model.tree
        return [
            Subgroup(rule=_rule_text(conditions, names), size=int(tree.count[leaf]), mean_effect=float(tree.value[leaf]))
            for leaf, conditions in model.leaf_rules()
        ]

    effect = estimated_effect(fit, d.X)
    groups = []
    for rule, mask in (("estimated effect > 0", effect > 0), ("estimated effect <= 0", effect <= 0)):
        if mask.any():
            groups.append(Subgroup(rule=rule, size=int(mask.sum()), mean_effect=float(effect[mask].mean())))
    return groups


def analyze(
    data_csv: Union[str, Path],
    spec: VtSpec,
    calibration: Optional[Tuple[int, float]] = None,
    schema: Optional[CsvSchema] = None,
    treatment: str = DEFAULT_TREATMENT_COLUMN,
    outcome: str = DEFAULT_OUTCOME_COLUMN,
    workers: int = 1,
) -> AnalysisReport:
    """
    Run Virtual Twins on a trial CSV.

    Args:
        data_csv: CSV with covariates, treatment and outcome columns
        spec: Method combination and seed
        calibration: Optional (M, alpha) permutation calibration of the step-2 penalty
        schema: Explicit layout (default: inferred from the file)
        treatment: Treatment column name used for inference
        outcome: Outcome column name used for inference
        workers: Parallel workers for calibration repetitions

    Returns:
        AnalysisReport: Fit, subgroups and selected variables

    Raises:
        DataError: If the CSV cannot be ingested
        FitError, CalibrationError: Propagated from the pipeline

    Example:
        >>> report = analyze("trial.csv", VtSpec(LassoSpec(), StepTwoSpec()), calibration=(100, 0.05))
        >>> report.fit.calibration.threshold
        0.0213
    """
    path = Path(data_csv)
    if schema is None:
        schema = infer_schema(path, treatment=treatment, outcome=outcome)
    d = load_csv(path, schema)

    if calibration is not None:
        m, alpha = calibration
        spec = replace(spec, step2=replace(spec.step2, tuning=PermutationCalibrated(m=int(m), alpha=float(alpha))))
    spec.step2.validate()

    fit = run_vt(d, spec, workers=workers)
    names = d.feature_names
    report = AnalysisReport(
        source=path,
        dataset=d,
        fit=fit,
        subgroups=subgroups_of(fit, d),
        selected=[names[j] for j in sorted(selected_variables(fit.step2_model))],
    )
    logger.info(f"Analysis of {path.name}: {len(report.subgroups)} subgroups, selected {report.selected}")
    return report


def _linear_lines(model: SparseLinearModel, names: List[str]) -> List[str]:
    lines = ["## Linear model", "", "| term | coefficient |", "|---|---|", f"| intercept | {model.intercept:.4g} |"]
    for j, coef in zip(model.selected, model.coefficients):
        lines.append(f"| {names[j]} | {coef:.4g} |")
    lines.append("")
    return lines


def render_analysis(report: AnalysisReport) -> str:
    """Markdown summary of an analysis."""
    fit = report.fit
    d = report.dataset
    lines = [
        f"# Virtual Twins analysis of {report.source.name}",
        "",
        f"- Rows: {d.n} ({int((d.T == 0).sum())} control, {int((d.T == 1).sum())} treated)",
        f"- Covariates: {d.p}",
        f"- Step 1: {fit.spec.step1.name}",
        f"- Step 2: {fit.step2_spec.label}",
        f"- Seed: {fit.spec.seed}",
        f"- Mean estimated effect: {float(np.mean(fit.cf.z_hat)):.4g}",
        f"- Selected variables: {', '.join(report.selected) if report.selected else 'none'}",
        "",
    ]
    if fit.calibration is not None:
        samples = fit.calibration.samples
        lines += [
            "## Calibration",
            "",
            f"- Permutations: {fit.calibration.m}",
            f"- Alpha: {fit.calibration.alpha:g}",
            f"- Threshold: {fit.calibration.threshold:.6g}",
            f"- Null penalties: min {samples.min():.4g}, median {float(np.median(samples)):.4g}, max {samples.max():.4g}",
            "",
        ]
    lines += ["## Subgroups", "", "| subgroup | rule | size | mean effect |", "|---|---|---|---|"]
    for i, group in enumerate(report.subgroups, start=1):
        lines.append(f"| {i} | {group.rule} | {group.size} | {group.mean_effect:.4g} |")
    lines.append("")
    if isinstance(fit.step2_model, SparseLinearModel):
        lines += _linear_lines(fit.step2_model, d.feature_names)
    return "\n".join(lines)


def write_analysis(report: AnalysisReport, out_dir: Union[str, Path]) -> List[Path]:
    """
    Write report.md and, for tree models, trees/tree.json and trees/tree.dot.

    Raises:
        OutputError: If a file cannot be written
    """
    out = ensure_directory_exists(out_dir)
    paths = [write_file_safe(out / REPORT_FILE, render_analysis(report))]
    if report.tree is not None:
        paths.extend(write_tree(report.tree, out / TREES_DIR, "tree"))
    return paths
