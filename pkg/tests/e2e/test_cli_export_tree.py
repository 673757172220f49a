"""End-to-end tests for the export-tree CLI command."""

import json
import subprocess
import sys

from virtual_twins_tools.harness.export import export_tree
from virtual_twins_tools.subgroup.models import StepTwoKind, TreeModel, TreeNode


def tree_file(path):
    root = TreeNode(
        id=0,
        count=60,
        mean=0.8,
        depth=0,
        variable=1,
        threshold=2.5,
        score=0.3,
        left=TreeNode(id=1, count=30, mean=-0.2, depth=1),
        right=TreeNode(id=2, count=30, mean=1.8, depth=1),
    )
    model = TreeModel.from_root(
        root, n_features=2, kind=StepTwoKind.REGRESSION_TREE, penalty_used=0.01, max_depth=2, feature_names=("age", "dose")
    )
    path.write_text(export_tree(model, "json"), encoding="utf-8")
    return path


class TestExportTreeCLI:
    """E2E tests for the export-tree CLI command."""

    def test_export_dot_file(self, temp_dir, monkeypatch):
        """Test converting a tree to a DOT file."""
        monkeypatch.chdir(temp_dir)
        source = tree_file(temp_dir / "tree.json")

        result = subprocess.run(
            [sys.executable, "-m", "virtual_twins_tools.cli", "export-tree", "--in", str(source), "--out", "tree.dot"],
            capture_output=True,
            text=True,
        )

        assert result.returncode == 0
        dot = (temp_dir / "tree.dot").read_text(encoding="utf-8")
        assert dot.startswith("digraph vt_tree {")
        assert "dose" in dot
        assert dot.count("->") == 2

    def test_export_json_stdout(self, temp_dir, monkeypatch):
        """Test re-emitting the tree JSON on stdout."""
        monkeypatch.chdir(temp_dir)
        source = tree_file(temp_dir / "tree.json")

        result = subprocess.run(
            [sys.executable, "-m", "virtual_twins_tools.cli", "export-tree", "--in", str(source), "--format", "json"],
            capture_output=True,
            text=True,
        )

        assert result.returncode == 0
        assert json.loads(result.stdout)["root"]["var_name"] == "dose"

    def test_export_not_a_tree(self, temp_dir, monkeypatch):
        """Test that a non-tree JSON file exits with code 1."""
        monkeypatch.chdir(temp_dir)
        (temp_dir / "other.json").write_text("{}")

        result = subprocess.run(
            [sys.executable, "-m", "virtual_twins_tools.cli", "export-tree", "--in", "other.json"],
            capture_output=True,
            text=True,
        )

        assert result.returncode == 1
        assert "Error:" in result.stderr
