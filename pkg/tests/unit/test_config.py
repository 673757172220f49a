"""Unit tests for benchmark configuration."""

import json

import pytest

from virtual_twins_tools.exceptions import ConfigError
from virtual_twins_tools.harness.config import (
    BenchmarkConfig,
    config_from_dict,
    default_method_grid,
    env_defaults,
    load_benchmark_config,
    method_from_config,
)
from virtual_twins_tools.learners.specs import ForestSpec, LassoSpec
from virtual_twins_tools.metrics import GroundTruthMode
from virtual_twins_tools.simulation import ScenarioConfig
from virtual_twins_tools.subgroup.models import StepTwoKind


class TestDefaults:
    """Tests for built-in and environment defaults."""

    def test_default_grid(self):
        """Test the 16 step-1/step-2 combinations."""
        grid = default_method_grid()
        labels = [m.label for m in grid]

        assert len(grid) == 16
        assert len(set(labels)) == 16
        assert "lasso/rtree" in labels
        assert "superlearner/none" in labels

    def test_default_config_is_valid(self):
        """Test that the defaults validate."""
        config = BenchmarkConfig()
        config.validate()

        assert config.scenarios == [ScenarioConfig()]
        assert config.replicates == 100
        assert config.ground_truth_mode is GroundTruthMode.REALIZED

    def test_env_defaults(self, monkeypatch):
        """Test that VT_* variables override defaults."""
        monkeypatch.setenv("VT_SEED", "7")
        monkeypatch.setenv("VT_WORKERS", "3")
        monkeypatch.setenv("VT_OUTPUT_DIR", "out")
        monkeypatch.delenv("VT_REPLICATES", raising=False)

        defaults = env_defaults()

        assert defaults == {"seed": 7, "workers": 3, "replicates": 100, "output_dir": "out"}

    def test_env_not_integer(self, monkeypatch):
        """Test that a non-numeric variable raises ConfigError."""
        monkeypatch.setenv("VT_WORKERS", "many")

        with pytest.raises(ConfigError) as exc_info:
            env_defaults()

        assert exc_info.value.key == "VT_WORKERS"


class TestConfigFromDict:
    """Tests for config_from_dict and method_from_config."""

    def test_full_object(self):
        """Test that every key is read."""
        raw = {
            "scenarios": [{"linearity": "nonlinear", "structure": "correlated", "teh": True, "n_train": 300}],
            "method_grid": [{"step1": "lasso", "step2": "ctree"}, {"step1": {"kind": "forest", "n_trees": 50}}],
            "replicates": 5,
            "workers": 2,
            "ground_truth_mode": "NOISELESS",
            "output_dir": "runs",
            "seed": 3,
            "export_trees": False,
        }

        config = config_from_dict(raw)

        assert config.scenarios[0].label == "nonlinear/corr/teh/n=300"
        assert config.method_grid[0].step2.kind is StepTwoKind.CONDITIONAL_TREE
        assert config.method_grid[1].step1 == ForestSpec(n_trees=50)
        assert config.method_grid[1].step2.kind is StepTwoKind.NONE
        assert config.ground_truth_mode is GroundTruthMode.NOISELESS
        assert (config.replicates, config.workers, config.seed) == (5, 2, 3)
        assert config.export_trees is False

    def test_defaults_fill_missing_keys(self):
        """Test that supplied defaults apply to omitted keys only."""
        config = config_from_dict({"replicates": 4}, defaults={"replicates": 9, "seed": 11})

        assert config.replicates == 4
        assert config.seed == 11

    def test_method_entry(self):
        """Test building one method combination."""
        method = method_from_config({"step1": {"kind": "lasso", "folds": 5}, "step2": "rtree"})

        assert method.step1 == LassoSpec(folds=5)
        assert method.label == "lasso/rtree"

    @pytest.mark.parametrize(
        "raw,key",
        [
            ({"replicas": 3}, "replicas"),
            ({"replicates": 0}, "replicates"),
            ({"workers": True}, "workers"),
            ({"seed": "1"}, "seed"),
            ({"ground_truth_mode": "expected"}, "ground_truth_mode"),
            ({"scenarios": [{"structure": "clustered"}]}, "structure"),
            ({"method_grid": [{"step1": "boosting"}]}, "step1"),
        ],
    )
    def test_invalid(self, raw, key):
        """Test that invalid configs raise ConfigError naming the key."""
        with pytest.raises(ConfigError) as exc_info:
            config_from_dict(raw)

        assert exc_info.value.key == key

    def test_duplicate_methods(self):
        """Test that repeated method labels are rejected."""
        with pytest.raises(ConfigError) as exc_info:
            config_from_dict({"method_grid": [{"step1": "lasso", "step2": "rtree"}, {"step1": "lasso", "step2": "rtree"}]})

        assert exc_info.value.key == "method_grid"

    def test_duplicate_scenarios(self):
        """Test that repeated scenario labels are rejected."""
        with pytest.raises(ConfigError) as exc_info:
            config_from_dict({"scenarios": [{"n_train": 100}, {"n_train": 100, "seed": 4}]})

        assert exc_info.value.key == "scenarios"


class TestLoadBenchmarkConfig:
    """Tests for load_benchmark_config function."""

    def test_load_file(self, temp_dir):
        """Test reading a JSON file."""
        path = temp_dir / "bench.json"
        path.write_text(json.dumps({"replicates": 2, "method_grid": [{"step1": "mars", "step2": "linear"}]}))

        config = load_benchmark_config(path)

        assert config.replicates == 2
        assert config.method_grid[0].label == "mars/linear"

    def test_missing_file(self, temp_dir):
        """Test that a missing file raises ConfigError with its path."""
        path = temp_dir / "absent.json"

        with pytest.raises(ConfigError) as exc_info:
            load_benchmark_config(path)

        assert exc_info.value.path == str(path)

    def test_invalid_json(self, temp_dir):
        """Test that malformed JSON raises ConfigError."""
        path = temp_dir / "bad.json"
        path.write_text("{replicates: 2")

        with pytest.raises(ConfigError):
            load_benchmark_config(path)

    def test_to_dict_round_trip(self):
        """Test that a serialized config loads back with the same labels."""
        config = config_from_dict({"replicates": 3, "method_grid": [{"step1": "sl", "step2": "ctree"}]})

        again = config_from_dict(config.to_dict())

        assert [m.label for m in again.method_grid] == ["superlearner/ctree"]
        assert again.replicates == 3
