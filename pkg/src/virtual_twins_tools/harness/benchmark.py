"""
Monte-Carlo benchmark over scenarios, method combinations and replicates.

Every (scenario, method, replicate) task is independent. The simulated data of
a task depends only on (master seed, scenario, replicate), so all methods of a
replicate see the same data; the method seed depends on (master seed,
scenario, method, replicate). Results are therefore identical for any worker
count.
"""

import logging
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Dict, List, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed

from .. import __version__
from ..exceptions import VirtualTwinsError
from ..metrics import AggregateMetrics, GroundTruthMode, ReplicateMetrics, aggregate_metrics, evaluate_replicate
from ..simulation.generators import generate, true_predictive_set
from ..simulation.scenarios import ScenarioConfig
from ..subgroup.models import TreeModel
from ..utils.seeding import derive_seed
from ..vt.engine import VtSpec, run_vt
from .config import BenchmarkConfig

logger = logging.getLogger(__name__)

DATA_STREAM = 0
METHOD_STREAM = 1


@dataclass(frozen=True)
class ReplicateFailure:
    """A replicate that raised instead of producing metrics."""

    replicate: int
    seed: int
    error: str


@dataclass(frozen=True)
class TaskResult:
    scenario_index: int
    method_index: int
    replicate: int
    metrics: Optional[ReplicateMetrics]
    failure: Optional[ReplicateFailure]
    tree: Optional[TreeModel]
    elapsed: float


@dataclass
class Cell:
    """
    One (scenario, method) cell of the results table.

    Attributes:
        scenario: Scenario of the column
        method: Method combination of the row
        aggregate: Aggregated metrics (None when every replicate failed)
        failures: Failed replicates with their seeds
        requested: Number of replicates requested
        elapsed: Total wall time of the cell's tasks in seconds
        tree: Step-2 tree of replicate 0, when the model is a tree
    """

    scenario: ScenarioConfig
    method: VtSpec
    aggregate: Optional[AggregateMetrics]
    failures: List[ReplicateFailure] = field(default_factory=list)
    requested: int = 0
    elapsed: float = 0.0
    tree: Optional[TreeModel] = None

    @property
    def partial(self) -> bool:
        return bool(self.failures)

    @property
    def replicates(self) -> int:
        return self.aggregate.replicates if self.aggregate is not None else 0


@dataclass
class ResultsTable:
    """
    Benchmark results: rows are method combinations, columns are scenarios.

    Attributes:
        scenarios: Column scenarios in config order
        methods: Row methods in config order
        cells: Cell per (scenario index, method index)
        metadata: Seed, versions, configuration and timing
    """

    scenarios: List[ScenarioConfig]
    methods: List[VtSpec]
    cells: Dict[Tuple[int, int], Cell]
    metadata: Dict[str, object] = field(default_factory=dict)

    def cell(self, scenario_index: int, method_index: int) -> Cell:
        return self.cells[(scenario_index, method_index)]

    @property
    def failure_count(self) -> int:
        return sum(len(c.failures) for c in self.cells.values())

    @property
    def partial(self) -> bool:
        return self.failure_count > 0


def data_seed(master: int, scenario_index: int, replicate: int) -> int:
    return derive_seed(master, DATA_STREAM, scenario_index, replicate)


def method_seed(master: int, scenario_index: int, method_index: int, replicate: int) -> int:
    return derive_seed(master, METHOD_STREAM, scenario_index, method_index, replicate)


def run_replicate(
    scenario: ScenarioConfig,
    method: VtSpec,
    seed_data: int,
    seed_method: int,
    ground_truth_mode: GroundTruthMode,
) -> Tuple[ReplicateMetrics, Optional[TreeModel]]:
    """
    Generate one replicate, fit the method on its training set and score it.

    Returns:
        Tuple (metrics, step-2 tree or None)
    """
    sim = generate(scenario.with_seed(seed_data))
    spec = VtSpec(step1=method.step1, step2=method.step2, seed=seed_method)
    fit = run_vt(sim.train, spec)
    metrics = evaluate_replicate(fit, sim, ground_truth_mode)
    tree = fit.step2_model if isinstance(fit.step2_model, TreeModel) else None
    return metrics, tree


def _run_task(
    config: BenchmarkConfig,
    scenario_index: int,
    method_index: int,
    replicate: int,
) -> TaskResult:
    scenario = config.scenarios[scenario_index]
    method = config.method_grid[method_index]
    seed_data = data_seed(config.seed, scenario_index, replicate)
    seed_method = method_seed(config.seed, scenario_index, method_index, replicate)
    started = time.perf_counter()
    try:
        metrics, tree = run_replicate(scenario, method, seed_data, seed_method, config.ground_truth_mode)
    except (VirtualTwinsError, ArithmeticError, np.linalg.LinAlgError, ValueError) as e:
        logger.error(
            f"{scenario.label} {method.label} replicate {replicate} failed "
            f"(data seed {seed_data}, method seed {seed_method}): {e}"
        )
        return TaskResult(
            scenario_index,
            method_index,
            replicate,
            metrics=None,
            failure=ReplicateFailure(replicate=replicate, seed=seed_data, error=f"{type(e).__name__}: {e}"),
            tree=None,
            elapsed=time.perf_counter() - started,
        )
    keep_tree = tree if (replicate == 0 and config.export_trees) else None
    return TaskResult(
        scenario_index,
        method_index,
        replicate,
        metrics=metrics,
        failure=None,
        tree=keep_tree,
        elapsed=time.perf_counter() - started,
    )


def library_versions() -> Dict[str, str]:
    import joblib
    import pandas
    import scipy
    import sklearn

    return {
        "virtual-twins-tools": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pandas.__version__,
        "scikit-learn": sklearn.__version__,
        "joblib": joblib.__version__,
    }


def run_benchmark(config: BenchmarkConfig) -> ResultsTable:
    """
    Run every (scenario, method, replicate) task and aggregate the cells.

    Replicate failures do not stop the sweep: they are logged, recorded in the
    cell with the failing data seed, and the cell is marked partial.

    Args:
        config: Validated benchmark configuration

    Returns:
        ResultsTable: One cell per (scenario, method)

    Raises:
        ConfigError: If the configuration is invalid

    Example:
        >>> table = run_benchmark(BenchmarkConfig(replicates=2, method_grid=[VtSpec(LassoSpec(), StepTwoSpec())]))
        >>> table.cell(0, 0).replicates
        2
    """
    config.validate()
    tasks = [
        (s, m, r)
        for s in range(len(config.scenarios))
        for m in range(len(config.method_grid))
        for r in range(config.replicates)
    ]
    logger.info(f"Running {len(tasks)} tasks on {config.workers} worker(s)")
    started_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
    wall_start = time.perf_counter()

    if config.workers > 1:
        results: List[TaskResult] = Parallel(n_jobs=config.workers)(
            delayed(_run_task)(config, s, m, r) for s, m, r in tasks
        )
    else:
        results = [_run_task(config, s, m, r) for s, m, r in tasks]

    grouped: Dict[Tuple[int, int], List[TaskResult]] = {}
    for result in results:
        grouped.setdefault((result.scenario_index, result.method_index), []).append(result)

    cells: Dict[Tuple[int, int], Cell] = {}
    for (s, m), group in sorted(grouped.items()):
        group.sort(key=lambda t: t.replicate)
        scenario = config.scenarios[s]
        successes = [t.metrics for t in group if t.metrics is not None]
        failures = [t.failure for t in group if t.failure is not None]
        aggregate = aggregate_metrics(successes, true_predictive_set(scenario)) if successes else None
        tree = next((t.tree for t in group if t.tree is not None), None)
        cells[(s, m)] = Cell(
            scenario=scenario,
            method=config.method_grid[m],
            aggregate=aggregate,
            failures=failures,
            requested=config.replicates,
            elapsed=float(sum(t.elapsed for t in group)),
            tree=tree,
        )
        status = "partial" if failures else "complete"
        logger.info(f"Cell {scenario.label} x {config.method_grid[m].label}: {len(successes)} replicates ({status})")

    metadata = {
        "seed": config.seed,
        "versions": library_versions(),
        "config": config.to_dict(),
        "started_at": started_at,
        "wall_seconds": time.perf_counter() - wall_start,
        "cells": [
            {
                "scenario": cell.scenario.label,
                "method": cell.method.label,
                "replicates": cell.replicates,
                "seconds": cell.elapsed,
                "failures": [
                    {"replicate": f.replicate, "seed": str(f.seed), "error": f.error} for f in cell.failures
                ],
            }
            for cell in cells.values()
        ],
    }
    return ResultsTable(
        scenarios=list(config.scenarios),
        methods=list(config.method_grid),
        cells=cells,
        metadata=metadata,
    )
