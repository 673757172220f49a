"""
Benchmark result files.

``results.csv`` is the long-format table (one row per cell and metric),
``results.md`` lays the same numbers out as one matrix per metric with method
combinations as rows and scenarios as columns, and ``run_metadata.json``
carries the seed, library versions and timing. Timing never enters the two
tables, so they are byte-identical across runs with the same configuration.
"""

import logging
import re
from pathlib import Path
from typing import List, Optional, Union

import pandas as pd

from ..constants import RESULTS_CSV, RESULTS_MD, RUN_METADATA, TREES_DIR
from ..exceptions import OutputError
from ..utils.file_ops import ensure_directory_exists, write_file_safe, write_json
from .benchmark import Cell, ResultsTable
from .export import write_tree

logger = logging.getLogger(__name__)

METRICS = ("accuracy", "ite_mse", "precision")
CSV_COLUMNS = [
    "scenario",
    "linearity",
    "structure",
    "teh",
    "n",
    "step1",
    "step2",
    "metric",
    "mean",
    "mc_se",
    "replicates",
    "failures",
]
_TITLES = {
    "accuracy": "Classification accuracy",
    "ite_mse": "Individual treatment effect MSE",
    "precision": "Pooled selection precision",
}


def format_number(value: Optional[float]) -> str:
    """12 significant digits; empty for missing values."""
    if value is None:
        return ""
    return f"{value:.12g}"


def cell_values(cell: Cell, metric: str):
    """Mean and Monte-Carlo standard error of one metric (None when undefined)."""
    agg = cell.aggregate
    if agg is None:
        return None, None
    if metric == "accuracy":
        return agg.mean_accuracy, agg.mc_se_accuracy
    if metric == "ite_mse":
        return agg.mean_mse, agg.mc_se_mse
    return agg.pooled_precision, None


def results_frame(table: ResultsTable) -> pd.DataFrame:
    """Long-format results with numbers pre-formatted as strings."""
    rows = []
    for (s, m), cell in sorted(table.cells.items()):
        scenario = cell.scenario
        for metric in METRICS:
            mean, se = cell_values(cell, metric)
            rows.append(
                {
                    "scenario": scenario.label,
                    "linearity": scenario.linearity.value,
                    "structure": scenario.structure.value,
                    "teh": "true" if scenario.teh else "false",
                    "n": str(scenario.n_train),
                    "step1": cell.method.step1.name,
                    "step2": cell.method.step2.label,
                    "metric": metric,
                    "mean": format_number(mean),
                    "mc_se": format_number(se),
                    "replicates": str(cell.replicates),
                    "failures": str(len(cell.failures)),
                }
            )
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def _markdown_cell(cell: Optional[Cell], metric: str) -> str:
    if cell is None:
        return ""
    mean, se = cell_values(cell, metric)
    if mean is None:
        text = "n/a"
    elif se is None:
        text = f"{mean:.3f}"
    else:
        text = f"{mean:.3f} ({se:.3f})"
    return f"{text}*" if cell.partial else text


def results_markdown(table: ResultsTable) -> str:
    """
    One matrix per metric: rows are (step1, step2), columns are scenario labels.

    Accuracy and MSE cells show the mean with its Monte-Carlo standard error in
    parentheses; partial cells are marked with ``*``.
    """
    seed = table.metadata.get("seed", "")
    config = table.metadata.get("config", {})
    lines = [
        "# Virtual Twins benchmark",
        "",
        f"- Master seed: {seed}",
        f"- Replicates per cell: {config.get('replicates', '')}",
        f"- Ground truth: {config.get('ground_truth_mode', '')}",
        "",
    ]
    header = ["step1", "step2"] + [s.label for s in table.scenarios]
    for metric in METRICS:
        lines.append(f"## {_TITLES[metric]}")
        lines.append("")
        lines.append("| " + " | ".join(header) + " |")
        lines.append("|" + "|".join(["---"] * len(header)) + "|")
        for m, method in enumerate(table.methods):
            values = [_markdown_cell(table.cells.get((s, m)), metric) for s in range(len(table.scenarios))]
            lines.append("| " + " | ".join([method.step1.name, method.step2.label] + values) + " |")
        lines.append("")
    if table.partial:
        lines.append(f"\\* partial cell: {table.failure_count} replicate(s) failed; see {RUN_METADATA}.")
        lines.append("")
    return "\n".join(lines)


def tree_stem(*labels: str) -> str:
    """File-name stem built from table labels, e.g. ``linear_reg_teh_n600__lasso_rtree``."""
    parts = [re.sub(r"[^A-Za-z0-9@.+-]+", "_", label.replace("=", "")).strip("_") for label in labels]
    return "__".join(parts)


def render_report(table: ResultsTable, out_dir: Union[str, Path]) -> List[Path]:
    """
    Write results.csv, results.md, run_metadata.json and the replicate-0 trees.

    Args:
        table: Complete or partial results
        out_dir: Output directory (created if missing)

    Returns:
        List[Path]: The written files

    Raises:
        OutputError: If the directory or a file cannot be written
    """
    out = ensure_directory_exists(out_dir)
    csv_path = out / RESULTS_CSV
    try:
        results_frame(table).to_csv(csv_path, index=False, lineterminator="\n")
    except OSError as e:
        raise OutputError(f"Cannot write {csv_path}: {e}", path=str(csv_path)) from e

    paths = [
        csv_path,
        write_file_safe(out / RESULTS_MD, results_markdown(table)),
        write_json(out / RUN_METADATA, table.metadata),
    ]
    for cell in table.cells.values():
        if cell.tree is not None:
            paths.extend(write_tree(cell.tree, out / TREES_DIR, tree_stem(cell.scenario.label, cell.method.label)))
    logger.info(f"Wrote {len(paths)} result files to {out}")
    return paths
