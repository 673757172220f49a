"""End-to-end tests for the benchmark CLI command."""

import json
import subprocess
import sys

import pandas as pd
import pytest


@pytest.fixture
def config_file(temp_dir):
    """A benchmark config small enough to run in seconds."""
    config = {
        "scenarios": [{"linearity": "linear", "structure": "regular", "teh": True, "n_train": 100, "n_test": 200}],
        "method_grid": [
            {
                "step1": {"kind": "lasso", "folds": 3, "n_lambda": 10},
                "step2": {"kind": "rtree", "min_leaf": 10, "tuning": {"mode": "cv", "folds": 3, "repeats": 1}},
            },
            {"step1": {"kind": "lasso", "folds": 3, "n_lambda": 10}, "step2": "none"},
        ],
        "replicates": 2,
        "seed": 5,
    }
    path = temp_dir / "bench.json"
    path.write_text(json.dumps(config))
    return path


class TestBenchmarkCLI:
    """E2E tests for the benchmark CLI command."""

    def test_benchmark_command_success(self, temp_dir, monkeypatch, config_file):
        """Test that a small benchmark writes its result files."""
        monkeypatch.chdir(temp_dir)

        result = subprocess.run(
            [sys.executable, "-m", "virtual_twins_tools.cli", "benchmark", "--config", str(config_file), "--out", "runs"],
            capture_output=True,
            text=True,
        )

        assert result.returncode == 0
        assert "Benchmark complete" in result.stdout
        frame = pd.read_csv(temp_dir / "runs" / "results.csv", dtype=str, keep_default_na=False)
        assert len(frame) == 6
        assert set(frame["step2"]) == {"rtree", "none"}
        assert (temp_dir / "runs" / "results.md").exists()
        assert json.loads((temp_dir / "runs" / "run_metadata.json").read_text())["seed"] == 5
        assert list((temp_dir / "runs" / "trees").glob("*.json"))

    def test_benchmark_reproducible(self, temp_dir, monkeypatch, config_file):
        """Test that two runs with the same seed write identical tables."""
        monkeypatch.chdir(temp_dir)
        for out in ("a", "b"):
            subprocess.run(
                [sys.executable, "-m", "virtual_twins_tools.cli", "benchmark", "-c", str(config_file), "-o", out, "--no-trees"],
                capture_output=True,
                text=True,
                check=True,
            )

        assert (temp_dir / "a" / "results.csv").read_bytes() == (temp_dir / "b" / "results.csv").read_bytes()
        assert (temp_dir / "a" / "results.md").read_bytes() == (temp_dir / "b" / "results.md").read_bytes()
        assert not (temp_dir / "a" / "trees").exists()

    def test_benchmark_bad_config(self, temp_dir, monkeypatch):
        """Test that an unknown config key exits with code 2."""
        monkeypatch.chdir(temp_dir)
        path = temp_dir / "bad.json"
        path.write_text(json.dumps({"replicas": 3}))

        result = subprocess.run(
            [sys.executable, "-m", "virtual_twins_tools.cli", "benchmark", "--config", str(path)],
            capture_output=True,
            text=True,
        )

        assert result.returncode == 2
        assert "replicas" in result.stderr
