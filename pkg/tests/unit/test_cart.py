"""Unit tests for the shared regression-tree machinery."""

import numpy as np

from virtual_twins_tools.learners.cart import TreeGrower, best_split, split_scores, sse


class TestSse:
    """Tests for sse function."""

    def test_sse_of_values(self):
        """Test the sum of squared deviations."""
        assert sse(np.array([1.0, 2.0, 3.0])) == 2.0

    def test_empty(self):
        """Test that an empty node has zero SSE."""
        assert sse(np.array([])) == 0.0


class TestBestSplit:
    """Tests for best_split and split_scores."""

    def test_midpoint_threshold(self):
        """Test that the threshold is the midpoint between distinct values."""
        X = np.array([[0.0], [1.0], [2.0], [3.0]])
        split = best_split(X, np.array([0.0, 0.0, 3.0, 3.0]), [0])

        assert split.feature == 0
        assert split.threshold == 1.5
        assert split.score == 9.0

    def test_chooses_informative_feature(self):
        """Test that the split variable is the one driving the response."""
        rng = np.random.default_rng(0)
        X = rng.normal(size=(100, 3))
        y = 5.0 * (X[:, 2] > 0.3)

        split = best_split(X, y, [0, 1, 2])

        assert split.feature == 2

    def test_tie_goes_to_lowest_feature(self):
        """Test that identical columns split on the lower index."""
        x = np.array([0.0, 1.0, 2.0, 3.0])
        X = np.column_stack([x, x])

        split = best_split(X, np.array([0.0, 0.0, 1.0, 1.0]), [0, 1])

        assert split.feature == 0

    def test_min_leaf_respected(self):
        """Test that splits leaving fewer than min_leaf rows are invalid."""
        X = np.arange(6, dtype=float).reshape(-1, 1)
        y = np.array([10.0, 0.0, 0.0, 0.0, 0.0, 0.0])

        split = best_split(X, y, [0], min_leaf=2)

        assert split.threshold == 1.5

    def test_no_valid_split(self):
        """Test that a constant covariate gives no split."""
        X = np.ones((5, 1))

        assert best_split(X, np.arange(5, dtype=float), [0]) is None

    def test_scores_shape(self):
        """Test one row of scores per feature and one column per position."""
        X = np.arange(10, dtype=float).reshape(5, 2)

        scores, thresholds = split_scores(X, np.arange(5, dtype=float), [0, 1])

        assert scores.shape == (2, 4)
        assert thresholds.shape == (2, 4)


def _grower(X, y, max_depth=None, min_leaf=1):
    features = np.arange(X.shape[1])
    return TreeGrower(
        lambda rows, depth: best_split(X[rows], y[rows], features, min_leaf=min_leaf),
        max_depth=max_depth,
    )


class TestCartTree:
    """Tests for TreeGrower and CartTree."""

    def test_step_function_is_recovered(self):
        """Test that a noiseless step is fitted exactly."""
        X = np.linspace(0, 1, 40).reshape(-1, 1)
        y = np.where(X[:, 0] > 0.5, 2.0, -1.0)

        tree = _grower(X, y).grow(X, y)

        assert tree.node_count == 3
        assert np.allclose(tree.predict(X), y)

    def test_nodes_in_preorder(self):
        """Test that the root is node 0 and its left child node 1."""
        X = np.linspace(0, 1, 40).reshape(-1, 1)
        y = np.where(X[:, 0] > 0.5, 2.0, -1.0)

        tree = _grower(X, y).grow(X, y)

        assert tree.left[0] == 1
        assert tree.right[0] == 2
        assert tree.leaves().tolist() == [1, 2]

    def test_left_means_less_or_equal(self):
        """Test that rows equal to the threshold go left."""
        X = np.array([[0.0], [1.0], [2.0], [3.0]])
        y = np.array([0.0, 0.0, 3.0, 3.0])
        tree = _grower(X, y).grow(X, y)

        assert tree.apply(np.array([[1.5]]))[0] == tree.left[0]

    def test_truncate_and_max_depth_routing_agree(self):
        """Test that routing with max_depth matches the truncated tree."""
        rng = np.random.default_rng(4)
        X = rng.normal(size=(80, 2))
        y = X[:, 0] + rng.normal(scale=0.1, size=80)
        tree = _grower(X, y, max_depth=4, min_leaf=3).grow(X, y)

        truncated = tree.truncate(2)

        assert truncated.max_depth <= 2
        assert np.allclose(truncated.predict(X), tree.predict(X, max_depth=2))

    def test_max_depth_zero_is_root(self):
        """Test that depth 0 gives a single leaf with the mean."""
        X = np.arange(10, dtype=float).reshape(-1, 1)
        y = np.arange(10, dtype=float)

        tree = _grower(X, y, max_depth=0).grow(X, y)

        assert tree.node_count == 1
        assert tree.value[0] == 4.5

    def test_split_features_in_preorder(self):
        """Test the split variables are listed root first."""
        X = np.linspace(0, 1, 40).reshape(-1, 1)
        y = np.where(X[:, 0] > 0.5, 2.0, -1.0)

        tree = _grower(X, y).grow(X, y)

        assert tree.split_features() == [0]
