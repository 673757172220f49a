"""End-to-end tests for the simulate CLI command."""

import json
import subprocess
import sys

import pandas as pd


class TestSimulateCLI:
    """E2E tests for the simulate CLI command."""

    def test_simulate_command_success(self, temp_dir, monkeypatch):
        """Test that simulate writes the four files and reports them."""
        monkeypatch.chdir(temp_dir)

        result = subprocess.run(
            [sys.executable, "-m", "virtual_twins_tools.cli", "simulate", "--n-train", "50", "--n-test", "40", "--seed", "3"],
            capture_output=True,
            text=True,
        )

        assert result.returncode == 0
        assert "Simulating linear/reg/teh/n=50" in result.stdout
        assert "Train rows: 50, test rows: 40" in result.stdout
        assert "Predictive covariates: X1, X17, X18, X19, X20, C103, C104, C105" in result.stdout
        for name in ("train.csv", "test.csv", "truth.csv", "scenario.json"):
            assert (temp_dir / "simulated" / name).exists()

    def test_simulate_selection_bias_to_custom_dir(self, temp_dir, monkeypatch):
        """Test a nonlinear selection-bias scenario written to --out."""
        monkeypatch.chdir(temp_dir)

        result = subprocess.run(
            [
                sys.executable,
                "-m",
                "virtual_twins_tools.cli",
                "simulate",
                "--linearity",
                "nonlinear",
                "--structure",
                "selection_bias",
                "--n-train",
                "40",
                "--n-test",
                "30",
                "--out",
                "sb",
            ],
            capture_output=True,
            text=True,
        )

        assert result.returncode == 0
        train = pd.read_csv(temp_dir / "sb" / "train.csv")
        meta = json.loads((temp_dir / "sb" / "scenario.json").read_text())
        assert len(train) == 40
        assert meta["predictive_set"] == [0, 1, 4]

    def test_simulate_no_teh(self, temp_dir, monkeypatch):
        """Test that --no-teh reports no predictive covariates."""
        monkeypatch.chdir(temp_dir)

        result = subprocess.run(
            [sys.executable, "-m", "virtual_twins_tools.cli", "simulate", "--no-teh", "--n-train", "20", "--n-test", "10"],
            capture_output=True,
            text=True,
        )

        assert result.returncode == 0
        assert "Predictive covariates: none" in result.stdout

    def test_simulate_invalid_size(self, temp_dir, monkeypatch):
        """Test that a zero training size exits with code 2."""
        monkeypatch.chdir(temp_dir)

        result = subprocess.run(
            [sys.executable, "-m", "virtual_twins_tools.cli", "simulate", "--n-train", "0"],
            capture_output=True,
            text=True,
        )

        assert result.returncode == 2
        assert "Error: Invalid scenario" in result.stderr
