"""Benchmark orchestration, real-data analysis, tree export and result reports."""

from .analysis import AnalysisReport, Subgroup, analyze, render_analysis, write_analysis
from .benchmark import Cell, ReplicateFailure, ResultsTable, run_benchmark, run_replicate
from .config import BenchmarkConfig, config_from_dict, default_method_grid, env_defaults, load_benchmark_config
from .export import TreeFormat, export_tree, load_tree, tree_from_json, write_tree
from .report import render_report, results_markdown

__all__ = [
    "AnalysisReport",
    "BenchmarkConfig",
    "Cell",
    "ReplicateFailure",
    "ResultsTable",
    "Subgroup",
    "TreeFormat",
    "analyze",
    "config_from_dict",
    "default_method_grid",
    "env_defaults",
    "export_tree",
    "load_benchmark_config",
    "load_tree",
    "render_analysis",
    "render_report",
    "results_markdown",
    "run_benchmark",
    "run_replicate",
    "tree_from_json",
    "write_analysis",
    "write_tree",
]
