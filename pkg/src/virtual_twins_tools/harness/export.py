"""
Tree export as JSON and Graphviz DOT.

The JSON form is lossless: ``tree_from_json`` rebuilds a TreeModel whose
JSON rendering is identical to the input.
"""

import json
import logging
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from ..exceptions import ValidationError
from ..subgroup.models import StepTwoKind, TreeModel, TreeNode
from ..utils.file_ops import write_file_safe

logger = logging.getLogger(__name__)

TREE_FORMAT = "vt-tree"


class TreeFormat(str, Enum):
    JSON = "json"
    DOT = "dot"


def _var_name(model: TreeModel, variable: int) -> str:
    if model.feature_names is not None and variable < len(model.feature_names):
        return model.feature_names[variable]
    return f"x{variable + 1}"


def _nan_to_none(value: float) -> Optional[float]:
    return None if value != value else float(value)


def _node_to_dict(model: TreeModel, node: TreeNode) -> Dict[str, Any]:
    if node.is_leaf:
        return {"id": node.id, "count": node.count, "leaf_mean": node.mean}
    payload: Dict[str, Any] = {
        "id": node.id,
        "count": node.count,
        "mean": node.mean,
        "var_name": _var_name(model, node.variable),
        "variable": node.variable,
        "threshold": node.threshold,
        "score": node.score,
    }
    if node.p_value is not None:
        payload["p_value"] = node.p_value
    if node.statistic is not None:
        payload["statistic"] = node.statistic
    payload["children"] = [_node_to_dict(model, node.left), _node_to_dict(model, node.right)]
    return payload


def tree_to_dict(model: TreeModel) -> Dict[str, Any]:
    """JSON-ready description of a fitted tree."""
    return {
        "format": TREE_FORMAT,
        "kind": StepTwoKind(model.kind).value,
        "n_features": model.n_features,
        "feature_names": list(model.feature_names) if model.feature_names is not None else None,
        "max_depth": model.max_depth,
        "penalty_used": _nan_to_none(model.penalty_used),
        "root": _node_to_dict(model, model.root),
    }


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def tree_to_dot(model: TreeModel) -> str:
    """
    Graphviz rendering: one node statement per tree node, labelled edges.

    Example:
        >>> print(tree_to_dot(model))
        digraph vt_tree {
          node [fontname="Helvetica"];
          n0 [label="X1\\nn=600\\nmean=1.02"];
        ...
    """
    lines = ["digraph vt_tree {", '  node [fontname="Helvetica"];']
    edges: List[str] = []
    for node in model.root.walk():
        if node.is_leaf:
            label = f"n={node.count}\\neffect={node.mean:.4g}"
            lines.append(f'  n{node.id} [shape=box, label="{label}"];')
            continue
        name = _escape(_var_name(model, node.variable))
        lines.append(f'  n{node.id} [label="{name}\\nn={node.count}\\nmean={node.mean:.4g}"];')
        edges.append(f'  n{node.id} -> n{node.left.id} [label="≤ {node.threshold:.4g}"];')
        edges.append(f'  n{node.id} -> n{node.right.id} [label="> {node.threshold:.4g}"];')
    lines.extend(edges)
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_tree(model: TreeModel, fmt: Union[TreeFormat, str] = TreeFormat.JSON) -> str:
    """
    Render a fitted tree as text.

    Args:
        model: Fitted step-2 tree
        fmt: "json" or "dot"

    Returns:
        str: The rendered tree
    """
    if TreeFormat(fmt) is TreeFormat.DOT:
        return tree_to_dot(model)
    return json.dumps(tree_to_dict(model), indent=2) + "\n"


def _node_from_dict(raw: Dict[str, Any], depth: int) -> TreeNode:
    try:
        if "children" not in raw:
            return TreeNode(id=int(raw["id"]), count=int(raw["count"]), mean=float(raw["leaf_mean"]), depth=depth)
        left, right = raw["children"]
        return TreeNode(
            id=int(raw["id"]),
            count=int(raw["count"]),
            mean=float(raw["mean"]),
            depth=depth,
            variable=int(raw["variable"]),
            threshold=float(raw["threshold"]),
            score=None if raw.get("score") is None else float(raw["score"]),
            p_value=None if raw.get("p_value") is None else float(raw["p_value"]),
            statistic=None if raw.get("statistic") is None else float(raw["statistic"]),
            left=_node_from_dict(left, depth + 1),
            right=_node_from_dict(right, depth + 1),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"Malformed tree node: {e}", field="node", value=raw.get("id")) from e


def tree_from_json(source: Union[str, Dict[str, Any]]) -> TreeModel:
    """
    Rebuild a TreeModel from its JSON rendering.

    Args:
        source: JSON text or an already parsed object

    Returns:
        TreeModel: The tree, renumbered in preorder

    Raises:
        ValidationError: If the document is not a vt-tree
    """
    if isinstance(source, str):
        try:
            raw = json.loads(source)
        except json.JSONDecodeError as e:
            raise ValidationError(f"Tree is not valid JSON: {e}", field="tree") from e
    else:
        raw = source
    if not isinstance(raw, dict) or raw.get("format") != TREE_FORMAT:
        raise ValidationError(f"Not a {TREE_FORMAT} document", field="format", value=raw.get("format") if isinstance(raw, dict) else None)

    try:
        kind = StepTwoKind(raw["kind"])
        n_features = int(raw["n_features"])
        max_depth = int(raw["max_depth"])
        root = raw["root"]
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"Malformed tree header: {e}", field="tree") from e
    penalty = raw.get("penalty_used")
    names = raw.get("feature_names")
    return TreeModel.from_root(
        _node_from_dict(root, 0),
        n_features=n_features,
        kind=kind,
        penalty_used=float("nan") if penalty is None else float(penalty),
        max_depth=max_depth,
        feature_names=tuple(names) if names is not None else None,
    )


def load_tree(path: Union[str, Path]) -> TreeModel:
    """Read a tree JSON file."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        return tree_from_json(f.read())


def write_tree(model: TreeModel, out_dir: Union[str, Path], stem: str) -> List[Path]:
    """
    Write ``<stem>.json`` and ``<stem>.dot`` into ``out_dir``.

    Raises:
        OutputError: If a file cannot be written
    """
    out_dir = Path(out_dir)
    paths = [
        write_file_safe(out_dir / f"{stem}.json", export_tree(model, TreeFormat.JSON)),
        write_file_safe(out_dir / f"{stem}.dot", export_tree(model, TreeFormat.DOT)),
    ]
    logger.debug(f"Wrote tree {stem} to {out_dir}")
    return paths
