"""Pytest configuration and shared fixtures."""

import os
import shutil
import tempfile
from pathlib import Path

import numpy as np
import pytest

os.environ.setdefault("SKIP_DOTENV_LOAD", "1")

from virtual_twins_tools.data import Dataset
from virtual_twins_tools.learners.specs import ForestSpec, LassoSpec, MarsSpec
from virtual_twins_tools.simulation import ScenarioConfig, generate
from virtual_twins_tools.subgroup.models import RepeatedCV, StepTwoKind, StepTwoSpec


@pytest.fixture
def temp_dir():
    """Create a temporary directory for tests that is cleaned up after use."""
    temp_path = tempfile.mkdtemp()
    yield Path(temp_path)
    shutil.rmtree(temp_path)


@pytest.fixture
def fast_lasso():
    """LASSO settings small enough for unit tests."""
    return LassoSpec(folds=3, n_lambda=20)


@pytest.fixture
def fast_forest():
    """Untuned forest with few trees."""
    return ForestSpec(n_trees=20, nodesize_grid=(5,), tune_mtry=False)


@pytest.fixture
def fast_mars():
    """MARS with a short forward pass."""
    return MarsSpec(max_terms=7)


@pytest.fixture
def fast_step2():
    """Factory for step-2 specs tuned by a single 3-fold CV."""

    def make(kind=StepTwoKind.REGRESSION_TREE, **overrides):
        options = {"tuning": RepeatedCV(folds=3, repeats=1), "min_leaf": 10}
        options.update(overrides)
        return StepTwoSpec(kind=kind, **options)

    return make


@pytest.fixture
def step_data():
    """
    Trial with a step effect on x2: treated rows gain 4 where x2 > 0.

    200 rows, 5 continuous covariates, alternating treatment, no noise.
    """
    rng = np.random.default_rng(11)
    X = rng.normal(size=(200, 5))
    T = np.arange(200) % 2
    Y = X[:, 0] + 4.0 * T * (X[:, 1] > 0)
    return Dataset.from_arrays(X, T, Y)


@pytest.fixture(scope="session")
def small_replicate():
    """One linear heterogeneous replicate with 200 training and 300 test rows."""
    return generate(ScenarioConfig(n_train=200, n_test=300, seed=5))


@pytest.fixture(scope="session")
def nonlinear_replicate():
    """One nonlinear heterogeneous replicate with 400 training and 400 test rows."""
    return generate(ScenarioConfig(linearity="nonlinear", n_train=400, n_test=400, seed=8))
