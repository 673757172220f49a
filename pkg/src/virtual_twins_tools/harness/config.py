"""Benchmark configuration: defaults, environment overrides and JSON config files."""

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from ..constants import (
    DEFAULT_OUTPUT_DIR,
    DEFAULT_REPLICATES,
    DEFAULT_SEED,
    DEFAULT_WORKERS,
)
from ..exceptions import ConfigError, SpecError
from ..learners.specs import (
    ForestSpec,
    LassoSpec,
    MarsSpec,
    SuperLearnerSpec,
    regressor_spec_from_config,
    regressor_spec_to_config,
)
from ..metrics import GroundTruthMode
from ..simulation.scenarios import ScenarioConfig, scenario_from_config, scenario_to_config
from ..subgroup.models import StepTwoKind, StepTwoSpec, step_two_spec_from_config, step_two_spec_to_config
from ..vt.engine import VtSpec

logger = logging.getLogger(__name__)

ENV_SEED = "VT_SEED"
ENV_WORKERS = "VT_WORKERS"
ENV_REPLICATES = "VT_REPLICATES"
ENV_OUTPUT_DIR = "VT_OUTPUT_DIR"
ENV_LOG_LEVEL = "VT_LOG_LEVEL"

CONFIG_KEYS = (
    "scenarios",
    "method_grid",
    "replicates",
    "workers",
    "ground_truth_mode",
    "output_dir",
    "seed",
    "export_trees",
)


def default_method_grid() -> List[VtSpec]:
    """All 16 combinations of the four step-1 learners and the four step-2 models."""
    step1 = [LassoSpec(), ForestSpec(), MarsSpec(), SuperLearnerSpec()]
    step2 = [StepTwoSpec(kind=kind) for kind in StepTwoKind]
    return [VtSpec(step1=s1, step2=s2) for s1 in step1 for s2 in step2]


def default_scenarios() -> List[ScenarioConfig]:
    return [ScenarioConfig()]


@dataclass
class BenchmarkConfig:
    """
    Settings of a simulation benchmark.

    Attributes:
        scenarios: Simulation settings (one table column each)
        method_grid: Step-1/step-2 combinations (one table row each)
        replicates: Replicates per (scenario, method) cell
        workers: Parallel worker processes
        ground_truth_mode: Realized or noiseless definition of the true optimal arm
        output_dir: Directory receiving the result files
        seed: Master seed of the run
        export_trees: Write the replicate-0 tree of every tree cell
    """

    scenarios: List[ScenarioConfig] = field(default_factory=default_scenarios)
    method_grid: List[VtSpec] = field(default_factory=default_method_grid)
    replicates: int = DEFAULT_REPLICATES
    workers: int = DEFAULT_WORKERS
    ground_truth_mode: GroundTruthMode = GroundTruthMode.REALIZED
    output_dir: str = DEFAULT_OUTPUT_DIR
    seed: int = DEFAULT_SEED
    export_trees: bool = True

    def validate(self) -> None:
        """
        Check the configuration.

        Raises:
            ConfigError: If a field is out of range
        """
        if not self.scenarios:
            raise ConfigError("At least one scenario is required", key="scenarios")
        if not self.method_grid:
            raise ConfigError("method_grid must not be empty", key="method_grid")
        for name in ("replicates", "workers"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}", key=name)
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}", key="seed")
        try:
            for scenario in self.scenarios:
                scenario.validate()
            for spec in self.method_grid:
                spec.step1.validate()
                spec.step2.validate()
        except SpecError as e:
            raise ConfigError(f"Invalid setting: {e}", key=e.field) from e
        labels = [spec.label for spec in self.method_grid]
        duplicates = sorted({label for label in labels if labels.count(label) > 1})
        if duplicates:
            raise ConfigError(f"Duplicate method combination: {duplicates[0]}", key="method_grid")
        columns = [scenario.label for scenario in self.scenarios]
        repeated = sorted({label for label in columns if columns.count(label) > 1})
        if repeated:
            raise ConfigError(f"Duplicate scenario: {repeated[0]}", key="scenarios")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scenarios": [scenario_to_config(s) for s in self.scenarios],
            "method_grid": [
                {"step1": regressor_spec_to_config(m.step1), "step2": step_two_spec_to_config(m.step2)}
                for m in self.method_grid
            ],
            "replicates": self.replicates,
            "workers": self.workers,
            "ground_truth_mode": GroundTruthMode(self.ground_truth_mode).value,
            "output_dir": str(self.output_dir),
            "seed": self.seed,
            "export_trees": self.export_trees,
        }


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {raw!r}", key=name)


def env_defaults() -> Dict[str, Any]:
    """
    Defaults taken from VT_* environment variables.

    Returns:
        dict: seed, workers, replicates and output_dir

    Raises:
        ConfigError: If a numeric variable does not parse

    Example:
        >>> os.environ["VT_WORKERS"] = "4"
        >>> env_defaults()["workers"]
        4
    """
    return {
        "seed": _env_int(ENV_SEED, DEFAULT_SEED),
        "workers": _env_int(ENV_WORKERS, DEFAULT_WORKERS),
        "replicates": _env_int(ENV_REPLICATES, DEFAULT_REPLICATES),
        "output_dir": os.environ.get(ENV_OUTPUT_DIR) or DEFAULT_OUTPUT_DIR,
    }


def method_from_config(entry: Any) -> VtSpec:
    """
    Build a method combination from ``{"step1": ..., "step2": ...}``.

    Both sides accept a name or an object with ``kind`` and spec fields.

    Raises:
        SpecError: On unknown names or invalid values
    """
    if not isinstance(entry, dict) or set(entry) - {"step1", "step2"} or "step1" not in entry:
        raise SpecError("Method entries need 'step1' and 'step2' keys only", field="method_grid", value=entry)
    return VtSpec(
        step1=regressor_spec_from_config(entry["step1"]),
        step2=step_two_spec_from_config(entry.get("step2", "none")),
    )


def _check_type(key: str, value: Any, expected: type, path: Optional[str]) -> None:
    if expected is int and isinstance(value, bool):
        raise ConfigError(f"{key} must be an integer", key=key, path=path)
    if not isinstance(value, expected):
        raise ConfigError(f"{key} must be of type {expected.__name__}", key=key, path=path)


def config_from_dict(raw: Dict[str, Any], path: Optional[str] = None, defaults: Optional[Dict[str, Any]] = None) -> BenchmarkConfig:
    """
    Build a BenchmarkConfig from a parsed JSON object.

    Missing keys fall back to ``defaults`` (typically env_defaults()) and then
    to the built-in defaults.

    Args:
        raw: Parsed config object
        path: File the object came from, for error messages
        defaults: Fallback values for seed, workers, replicates and output_dir

    Returns:
        BenchmarkConfig: Validated configuration

    Raises:
        ConfigError: On unknown keys, wrong types or invalid values
    """
    if not isinstance(raw, dict):
        raise ConfigError("Config must be a JSON object", path=path)
    unknown = sorted(set(raw) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"Unknown config key: {unknown[0]}", key=unknown[0], path=path)

    options: Dict[str, Any] = dict(defaults or {})
    try:
        if "scenarios" in raw:
            _check_type("scenarios", raw["scenarios"], list, path)
            options["scenarios"] = [scenario_from_config(s) for s in raw["scenarios"]]
        if "method_grid" in raw:
            _check_type("method_grid", raw["method_grid"], list, path)
            options["method_grid"] = [method_from_config(m) for m in raw["method_grid"]]
    except SpecError as e:
        raise ConfigError(f"Invalid setting in {path or 'config'}: {e}", key=e.field, path=path) from e

    for key in ("replicates", "workers", "seed"):
        if key in raw:
            _check_type(key, raw[key], int, path)
            options[key] = raw[key]
    if "output_dir" in raw:
        _check_type("output_dir", raw["output_dir"], str, path)
        options["output_dir"] = raw["output_dir"]
    if "export_trees" in raw:
        _check_type("export_trees", raw["export_trees"], bool, path)
        options["export_trees"] = raw["export_trees"]
    if "ground_truth_mode" in raw:
        try:
            options["ground_truth_mode"] = GroundTruthMode(str(raw["ground_truth_mode"]).lower())
        except ValueError:
            raise ConfigError(
                f"ground_truth_mode must be 'realized' or 'noiseless', got {raw['ground_truth_mode']!r}",
                key="ground_truth_mode",
                path=path,
            )

    config = BenchmarkConfig(**options)
    try:
        config.validate()
    except ConfigError as e:
        raise ConfigError(str(e), key=e.key, path=path) from e
    return config


def load_benchmark_config(path: Union[str, Path], defaults: Optional[Dict[str, Any]] = None) -> BenchmarkConfig:
    """
    Read a JSON benchmark config.

    Args:
        path: Config file
        defaults: Fallback values for keys the file omits

    Returns:
        BenchmarkConfig: Validated configuration

    Raises:
        ConfigError: If the file is missing, not JSON, or invalid
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"Config file not found: {path}", path=str(path)) from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config file is not valid JSON: {e}", path=str(path)) from e
    config = config_from_dict(raw, path=str(path), defaults=defaults)
    logger.info(
        f"Loaded {path}: {len(config.scenarios)} scenarios, {len(config.method_grid)} methods, "
        f"{config.replicates} replicates"
    )
    return config
