"""
Axis-aligned binary regression trees.

This module holds the pieces shared by the forest learner and the step-2 tree
models: a vectorized variance-reduction split search, a recursive grower that
accepts any split-finding strategy, and an array-backed tree that routes rows
with "x <= threshold" going left.

Split candidates are midpoints between consecutive distinct values of a
variable. Ties in score go to the lowest variable index, then to the smallest
threshold.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

LEAF = -1


@dataclass(frozen=True)
class Split:
    """
    A candidate split of a node.

    Attributes:
        feature: Column index of the split variable
        threshold: Rows with x <= threshold go left
        score: Decrease in sum of squared errors achieved by the split
        p_value: Adjusted p-value of the variable test (conditional trees only)
        statistic: Test statistic of the split variable (conditional trees only)
    """

    feature: int
    threshold: float
    score: float
    p_value: float = float("nan")
    statistic: float = float("nan")


def sse(y: np.ndarray) -> float:
    """Sum of squared deviations from the mean."""
    if y.size == 0:
        return 0.0
    centered = y - y.mean()
    return float(centered @ centered)


def split_scores(X: np.ndarray, y: np.ndarray, features: Sequence[int], min_leaf: int = 1):
    """
    Score every valid split of a node on the given features.

    Args:
        X: m×p covariates of the node's rows
        y: Length-m response of the node's rows
        features: Column indices to search, in ascending order
        min_leaf: Minimum number of rows on each side of a split

    Returns:
        Tuple (scores, thresholds): two k×(m-1) arrays, one row per feature, one
        column per sorted position. Invalid positions score -inf.
    """
    features = np.asarray(features, dtype=np.int64)
    m = y.shape[0]
    if m < 2 or features.size == 0:
        return np.full((features.size, 0), -np.inf), np.zeros((features.size, 0))

    Xs = X[:, features]
    order = np.argsort(Xs, axis=0, kind="mergesort")
    xs = np.take_along_axis(Xs, order, axis=0)

    centered = y - y.mean()
    total = centered.sum()
    left_sum = np.cumsum(centered[order], axis=0)[:-1]
    n_left = np.arange(1, m, dtype=float)[:, None]
    n_right = m - n_left

    scores = left_sum**2 / n_left + (total - left_sum) ** 2 / n_right - total**2 / m
    valid = (xs[1:] > xs[:-1]) & (n_left >= min_leaf) & (n_right >= min_leaf)
    scores = np.where(valid, scores, -np.inf)
    thresholds = 0.5 * (xs[1:] + xs[:-1])
    return scores.T, thresholds.T


def best_split(X: np.ndarray, y: np.ndarray, features: Sequence[int], min_leaf: int = 1) -> Optional[Split]:
    """
    Find the variance-reduction split with the largest score.

    Args:
        X: m×p covariates of the node's rows
        y: Length-m response of the node's rows
        features: Column indices to search, in ascending order
        min_leaf: Minimum number of rows on each side of a split

    Returns:
        Optional[Split]: The best split, or None if no valid split exists

    Example:
        >>> X = np.array([[0.0], [1.0], [2.0], [3.0]])
        >>> best_split(X, np.array([0.0, 0.0, 3.0, 3.0]), [0]).threshold
        1.5
    """
    scores, thresholds = split_scores(X, y, features, min_leaf)
    if scores.size == 0:
        return None
    flat = int(np.argmax(scores))
    row, col = divmod(flat, scores.shape[1])
    score = float(scores[row, col])
    if not np.isfinite(score):
        return None
    return Split(feature=int(np.asarray(features)[row]), threshold=float(thresholds[row, col]), score=score)


@dataclass(frozen=True)
class CartTree:
    """
    Array-backed binary regression tree in preorder.

    Node 0 is the root. For internal nodes ``feature`` holds the split column and
    ``left``/``right`` the child ids; leaves have ``feature == -1``.

    Attributes:
        feature: Split column per node (-1 for leaves)
        threshold: Split threshold per node (nan for leaves)
        left: Left child id per node (-1 for leaves)
        right: Right child id per node (-1 for leaves)
        value: Mean response of the training rows in the node
        count: Number of training rows in the node
        depth: Depth of the node (root = 0)
        score: Split score per internal node (nan for leaves)
        p_value: Variable-test p-value per internal node (nan if not applicable)
        statistic: Variable-test statistic per internal node (nan if not applicable)
        n_features: Number of columns the tree was trained on
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    count: np.ndarray
    depth: np.ndarray
    score: np.ndarray
    p_value: np.ndarray
    statistic: np.ndarray
    n_features: int

    @property
    def node_count(self) -> int:
        return int(self.feature.shape[0])

    @property
    def max_depth(self) -> int:
        """Depth of the deepest node."""
        return int(self.depth.max()) if self.node_count else 0

    def is_leaf(self, node: int) -> bool:
        return bool(self.feature[node] == LEAF)

    def leaves(self) -> np.ndarray:
        """Ids of all leaves in preorder."""
        return np.flatnonzero(self.feature == LEAF)

    def split_features(self) -> List[int]:
        """Split variables in preorder, with repeats."""
        return [int(f) for f in self.feature if f != LEAF]

    def apply(self, X: np.ndarray, max_depth: Optional[int] = None) -> np.ndarray:
        """
        Route rows to their terminal nodes.

        Args:
            X: m×p covariates
            max_depth: Stop routing at this depth, as if the tree were truncated

        Returns:
            numpy.ndarray: Node id reached by each row
        """
        X = np.asarray(X, dtype=float)
        node = np.zeros(X.shape[0], dtype=np.int64)
        while True:
            feature = self.feature[node]
            active = feature != LEAF
            if max_depth is not None:
                active &= self.depth[node] < max_depth
            if not active.any():
                return node
            rows = np.flatnonzero(active)
            at = node[rows]
            go_left = X[rows, feature[rows]] <= self.threshold[at]
            node[rows] = np.where(go_left, self.left[at], self.right[at])

    def predict(self, X: np.ndarray, max_depth: Optional[int] = None) -> np.ndarray:
        """Mean response of the node each row is routed to."""
        return self.value[self.apply(X, max_depth)]

    def truncate(self, depth: int) -> "CartTree":
        """
        Return the subtree containing nodes of depth at most ``depth``.

        Nodes at the cut depth become leaves and keep their mean and count.
        """
        builder = TreeBuilder()

        def copy(node: int) -> int:
            new_id = builder.add(
                value=self.value[node],
                count=self.count[node],
                depth=self.depth[node],
            )
            if self.feature[node] != LEAF and self.depth[node] < depth:
                left = copy(int(self.left[node]))
                right = copy(int(self.right[node]))
                builder.set_split(
                    new_id,
                    Split(
                        feature=int(self.feature[node]),
                        threshold=float(self.threshold[node]),
                        score=float(self.score[node]),
                        p_value=float(self.p_value[node]),
                        statistic=float(self.statistic[node]),
                    ),
                    left,
                    right,
                )
            return new_id

        copy(0)
        return builder.build(self.n_features)


@dataclass
class TreeBuilder:
    feature: List[int] = field(default_factory=list)
    threshold: List[float] = field(default_factory=list)
    left: List[int] = field(default_factory=list)
    right: List[int] = field(default_factory=list)
    value: List[float] = field(default_factory=list)
    count: List[int] = field(default_factory=list)
    depth: List[int] = field(default_factory=list)
    score: List[float] = field(default_factory=list)
    p_value: List[float] = field(default_factory=list)
    statistic: List[float] = field(default_factory=list)

    def add(self, value: float, count: int, depth: int) -> int:
        self.feature.append(LEAF)
        self.threshold.append(float("nan"))
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(float(value))
        self.count.append(int(count))
        self.depth.append(int(depth))
        self.score.append(float("nan"))
        self.p_value.append(float("nan"))
        self.statistic.append(float("nan"))
        return len(self.feature) - 1

    def set_split(self, node: int, split: Split, left: int, right: int) -> None:
        self.feature[node] = split.feature
        self.threshold[node] = split.threshold
        self.left[node] = left
        self.right[node] = right
        self.score[node] = split.score
        self.p_value[node] = split.p_value
        self.statistic[node] = split.statistic

    def build(self, n_features: int) -> CartTree:
        return CartTree(
            feature=np.array(self.feature, dtype=np.int64),
            threshold=np.array(self.threshold, dtype=float),
            left=np.array(self.left, dtype=np.int64),
            right=np.array(self.right, dtype=np.int64),
            value=np.array(self.value, dtype=float),
            count=np.array(self.count, dtype=np.int64),
            depth=np.array(self.depth, dtype=np.int64),
            score=np.array(self.score, dtype=float),
            p_value=np.array(self.p_value, dtype=float),
            statistic=np.array(self.statistic, dtype=float),
            n_features=int(n_features),
        )


SplitFinder = Callable[[np.ndarray, int], Optional[Split]]


class TreeGrower:
    """
    Recursive tree grower parameterized by a split-finding strategy.

    The strategy receives the row indices of a node and its depth and returns
    the split to apply, or None to make the node a leaf. The grower enforces
    the depth limit and the minimum node size for splitting.

    Example:
        >>> grower = TreeGrower(lambda rows, depth: best_split(X[rows], y[rows], range(p)), max_depth=3)
        >>> tree = grower.grow(X, y)
    """

    def __init__(self, find_split: SplitFinder, max_depth: Optional[int] = None, min_split: int = 2):
        self.find_split = find_split
        self.max_depth = max_depth
        self.min_split = max(2, int(min_split))

    def grow(self, X: np.ndarray, y: np.ndarray, rows: Optional[np.ndarray] = None) -> CartTree:
        """
        Grow a tree on the given rows of (X, y).

        Args:
            X: n×p covariates
            y: Length-n response
            rows: Row indices to use (default: all rows, duplicates allowed)

        Returns:
            CartTree: The grown tree
        """
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        rows = np.arange(y.shape[0]) if rows is None else np.asarray(rows, dtype=np.int64)
        builder = TreeBuilder()

        def grow_node(node_rows: np.ndarray, depth: int) -> int:
            node_y = y[node_rows]
            node_id = builder.add(value=node_y.mean(), count=node_rows.size, depth=depth)
            if self.max_depth is not None and depth >= self.max_depth:
                return node_id
            if node_rows.size < self.min_split or sse(node_y) <= 0.0:
                return node_id

            split = self.find_split(node_rows, depth)
            if split is None:
                return node_id

            go_left = X[node_rows, split.feature] <= split.threshold
            left_rows, right_rows = node_rows[go_left], node_rows[~go_left]
            if left_rows.size == 0 or right_rows.size == 0:
                return node_id
            left = grow_node(left_rows, depth + 1)
            right = grow_node(right_rows, depth + 1)
            builder.set_split(node_id, split, left, right)
            return node_id

        grow_node(rows, 0)
        return builder.build(X.shape[1])
