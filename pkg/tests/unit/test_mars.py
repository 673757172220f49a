"""Unit tests for the MARS learner."""

import math

import numpy as np
import pytest

from virtual_twins_tools.exceptions import FitError
from virtual_twins_tools.learners.mars import Hinge, Term, candidate_knots, default_spans, fit_mars, gcv
from virtual_twins_tools.learners.specs import MarsSpec


class TestGcv:
    """Tests for gcv function."""

    def test_additive_penalty(self):
        """Test C = M + 2(M-1)/2 for degree 1."""
        assert gcv(5.0, 10, 3, degree=1) == pytest.approx(5.0 / (10 * (1 - 5 / 10) ** 2))

    def test_interaction_penalty(self):
        """Test C = M + 3(M-1)/2 for higher degrees."""
        assert gcv(5.0, 10, 3, degree=2) == pytest.approx(5.0 / (10 * (1 - 6 / 10) ** 2))

    def test_saturated_model(self):
        """Test that C >= n gives infinity."""
        assert gcv(1.0, 4, 4) == math.inf


class TestKnots:
    """Tests for default_spans and candidate_knots."""

    def test_spans_are_valid(self):
        """Test that spans are at least 1 and 0."""
        min_span, end_span = default_spans(300, 110)

        assert min_span >= 1
        assert end_span >= 0

    def test_maximum_never_a_knot(self):
        """Test that the largest value is excluded."""
        knots = candidate_knots(np.arange(10, dtype=float), min_span=1, end_span=0)

        assert 9.0 not in knots
        assert knots.tolist() == list(range(9))

    def test_end_span_trims_both_ends(self):
        """Test trimming by end_span."""
        knots = candidate_knots(np.arange(20, dtype=float), min_span=1, end_span=3)

        assert knots.min() == 3.0
        assert knots.max() <= 16.0

    def test_constant_column_has_no_knots(self):
        """Test that a single distinct value gives no candidates."""
        assert candidate_knots(np.ones(5), 1, 0).size == 0


class TestBasis:
    """Tests for Hinge and Term."""

    def test_hinge_pair(self):
        """Test both hinge directions."""
        X = np.array([[0.0], [1.0], [3.0]])

        assert Hinge(0, 1.0, 1).evaluate(X).tolist() == [0.0, 0.0, 2.0]
        assert Hinge(0, 1.0, -1).evaluate(X).tolist() == [1.0, 0.0, 0.0]

    def test_empty_term_is_intercept(self):
        """Test that the empty product evaluates to one."""
        assert Term().evaluate(np.zeros((3, 2))).tolist() == [1.0, 1.0, 1.0]
        assert Term().describe() == "(Intercept)"


class TestFitMars:
    """Tests for fit_mars function."""

    def test_exact_linear_fit(self):
        """Test that a linear function is reproduced."""
        x = np.linspace(-2, 2, 60)

        fit = fit_mars(x.reshape(-1, 1), 2.0 * x + 1.0, MarsSpec(max_terms=5))

        assert fit.rss < 1e-8
        assert np.allclose(fit.predict(x.reshape(-1, 1)), 2.0 * x + 1.0)

    def test_hinge_recovered(self):
        """Test that a kinked function is fitted closely."""
        rng = np.random.default_rng(1)
        X = rng.uniform(-1, 1, size=(200, 3))
        y = np.maximum(0.0, X[:, 0] - 0.2) * 4.0

        fit = fit_mars(X, y, MarsSpec(max_terms=7))

        assert 0 in fit.selected_variables()
        assert np.mean((fit.predict(X) - y) ** 2) < 0.01

    def test_forward_rss_non_increasing(self):
        """Test that the forward pass never increases the training RSS."""
        rng = np.random.default_rng(2)
        X = rng.normal(size=(100, 4))
        y = X[:, 1] ** 2 + rng.normal(scale=0.1, size=100)

        fit = fit_mars(X, y, MarsSpec(max_terms=9))

        assert all(b <= a + 1e-9 for a, b in zip(fit.forward_rss, fit.forward_rss[1:]))

    def test_constant_outcome(self):
        """Test that a constant outcome gives the intercept-only model."""
        X = np.random.default_rng(0).normal(size=(30, 2))

        fit = fit_mars(X, np.full(30, 4.0), MarsSpec(max_terms=5))

        assert fit.terms == ()
        assert fit.predict(X) == pytest.approx(np.full(30, 4.0))

    def test_too_few_rows(self):
        """Test that fewer than 4 rows raises FitError."""
        with pytest.raises(FitError):
            fit_mars(np.ones((3, 1)), np.ones(3))
