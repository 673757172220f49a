"""
Simulated trial populations with known potential outcomes.

Each replicate draws 100 continuous covariates around a freshly drawn mean
vector mu, 10 binary covariates, a fair-coin treatment, and both potential
outcomes from a linear or a nonlinear (piecewise-constant) model. Training
and test sets are disjoint subsets of one population draw; under the
selection-bias structure the training rows over-represent the upper half of a
covariate score.

Covariate indices are 0-based. Column names keep the generator's 1-based
numbering: ``X1..X100`` for continuous and ``C101..C110`` for binary columns.
"""

import logging
from dataclasses import dataclass
from functools import partial
from pathlib import Path
from typing import FrozenSet, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from ..constants import (
    BINARY_PROBABILITY,
    BOTTOM_HALF_SHARE,
    CORRELATED_BLOCK,
    CORRELATION,
    LINEAR_NOISE_SD,
    MU_VARIANCE,
    N_BINARY,
    N_CONTINUOUS,
    NO_TEH_SHIFT,
    NONLINEAR_NOISE_SD,
    TREATMENT_PROBABILITY,
)
from ..data import ColumnKind, Dataset, write_csv
from ..exceptions import OutputError, SamplingError
from ..learners.base import CallableRegressor
from ..utils.file_ops import ensure_directory_exists, write_json
from ..utils.seeding import derive_seed, make_rng
from .scenarios import Linearity, ScenarioConfig, Structure, scenario_to_config

logger = logging.getLogger(__name__)

# Seed streams under the scenario seed
COVARIATE_STREAM = 0
TREATMENT_STREAM = 1
NOISE_STREAM = 2
SPLIT_STREAM = 3
SAMPLING_STREAM = 4

# Nonzero coefficients of the linear model (0-based)
CONTROL_COEFFICIENTS = tuple(range(1, 16)) + (100, 101)
TREATED_COEFFICIENTS = tuple(range(0, 20)) + tuple(range(100, 105))

# Score columns of the selection-bias sampler (0-based)
LINEAR_SCORE_COLUMNS = (14, 15, 16, 17)
NONLINEAR_SCORE_COLUMNS = (0, 4)


@dataclass(frozen=True)
class CovariateDraw:
    """
    Covariates of one population draw.

    Attributes:
        X: n×110 covariate matrix
        names: Column names
        kinds: Column kinds
        mu: Length-100 mean vector of the continuous covariates
    """

    X: np.ndarray
    names: Tuple[str, ...]
    kinds: Tuple[ColumnKind, ...]
    mu: np.ndarray


@dataclass(frozen=True)
class PotentialOutcomes:
    """Conditional means and realized draws of both potential outcomes."""

    y0_mean: np.ndarray
    y1_mean: np.ndarray
    y0: np.ndarray
    y1: np.ndarray

    def subset(self, rows: np.ndarray) -> "PotentialOutcomes":
        return PotentialOutcomes(self.y0_mean[rows], self.y1_mean[rows], self.y0[rows], self.y1[rows])


@dataclass(frozen=True)
class GroundTruth:
    """
    Per-row truth for one set of simulated rows.

    Attributes:
        y0_mean: True conditional mean under control
        y1_mean: True conditional mean under treatment
        y0: Realized outcome under control
        y1: Realized outcome under treatment
        z_true: y1_mean - y0_mean
        optimal_arm_noiseless: 1 where y1_mean > y0_mean, else 0
        optimal_arm_realized: 1 where y1 > y0, else 0
    """

    y0_mean: np.ndarray
    y1_mean: np.ndarray
    y0: np.ndarray
    y1: np.ndarray
    z_true: np.ndarray
    optimal_arm_noiseless: np.ndarray
    optimal_arm_realized: np.ndarray

    @classmethod
    def from_outcomes(cls, outcomes: PotentialOutcomes) -> "GroundTruth":
        return cls(
            y0_mean=outcomes.y0_mean,
            y1_mean=outcomes.y1_mean,
            y0=outcomes.y0,
            y1=outcomes.y1,
            z_true=outcomes.y1_mean - outcomes.y0_mean,
            optimal_arm_noiseless=(outcomes.y1_mean > outcomes.y0_mean).astype(np.int64),
            optimal_arm_realized=(outcomes.y1 > outcomes.y0).astype(np.int64),
        )


@dataclass(frozen=True)
class SimulatedData:
    """
    One simulated replicate.

    Attributes:
        train: Training Dataset (observed outcome only)
        test: Test Dataset
        train_truth: Ground truth for the training rows
        test_truth: Ground truth for the test rows
        predictive_set: 0-based indices of the covariates that modify the effect
        mu: Mean vector of the continuous covariates
        config: Scenario that produced the data
    """

    train: Dataset
    test: Dataset
    train_truth: GroundTruth
    test_truth: GroundTruth
    predictive_set: FrozenSet[int]
    mu: np.ndarray
    config: ScenarioConfig


def covariate_layout() -> Tuple[Tuple[str, ...], Tuple[ColumnKind, ...]]:
    """Names and kinds of the 110 simulated columns."""
    names = tuple(f"X{j + 1}" for j in range(N_CONTINUOUS)) + tuple(
        f"C{N_CONTINUOUS + j + 1}" for j in range(N_BINARY)
    )
    kinds = (ColumnKind.CONTINUOUS,) * N_CONTINUOUS + (ColumnKind.BINARY,) * N_BINARY
    return names, kinds


def correlation_matrix(structure: Structure) -> np.ndarray:
    """Covariance of the continuous block: identity, or 0.7 correlation among the first four."""
    sigma = np.eye(N_CONTINUOUS)
    if structure is Structure.CORRELATED:
        block = np.full((CORRELATED_BLOCK, CORRELATED_BLOCK), CORRELATION)
        np.fill_diagonal(block, 1.0)
        sigma[:CORRELATED_BLOCK, :CORRELATED_BLOCK] = block
    return sigma


def draw_covariates(config: ScenarioConfig, n: int, seed: int) -> CovariateDraw:
    """
    Draw mu and an n-row covariate matrix.

    Continuous columns follow N(mu, Sigma) with mu_j ~ N(0, variance 3); binary
    columns are i.i.d. Bernoulli(0.7).

    Args:
        config: Scenario (its structure selects Sigma)
        n: Number of rows
        seed: Seed for mu and the covariates

    Returns:
        CovariateDraw: Matrix, layout and mu
    """
    if n < 1:
        raise SamplingError(f"Need at least one row, got {n}", quota=n, available=0)
    rng = make_rng(seed)
    mu = rng.normal(0.0, np.sqrt(MU_VARIANCE), size=N_CONTINUOUS)
    noise = rng.standard_normal((n, N_CONTINUOUS))
    if config.structure is Structure.CORRELATED:
        chol = np.linalg.cholesky(correlation_matrix(config.structure)[:CORRELATED_BLOCK, :CORRELATED_BLOCK])
        noise[:, :CORRELATED_BLOCK] = noise[:, :CORRELATED_BLOCK] @ chol.T
    continuous = mu + noise
    binary = (rng.random((n, N_BINARY)) < BINARY_PROBABILITY).astype(float)
    names, kinds = covariate_layout()
    return CovariateDraw(X=np.hstack([continuous, binary]), names=names, kinds=kinds, mu=mu)


def assign_treatment(n: int, seed: int) -> np.ndarray:
    """Fair-coin treatment indicators as int64."""
    rng = make_rng(seed)
    return (rng.random(n) < TREATMENT_PROBABILITY).astype(np.int64)


def linear_means(X: np.ndarray, teh: bool) -> Tuple[np.ndarray, np.ndarray]:
    """
    Conditional means of the linear model.

    With heterogeneity, control sums columns {1..15, 100, 101} and treatment
    sums {0..19, 100..104}. Without, both arms share the treatment sum and the
    treated arm is shifted by +2.
    """
    X = np.asarray(X, dtype=float)
    treated = X[:, list(TREATED_COEFFICIENTS)].sum(axis=1)
    if not teh:
        return treated, treated + NO_TEH_SHIFT
    control = X[:, list(CONTROL_COEFFICIENTS)].sum(axis=1)
    return control, treated


def nonlinear_means(X: np.ndarray, mu: np.ndarray, teh: bool) -> Tuple[np.ndarray, np.ndarray]:
    """
    Conditional means of the piecewise-constant model.

    Cells are defined by each variable falling above or below its mean mu_j.
    With heterogeneity the control and treated arms use different level
    tables on (X1, X2 | X5); without, both share one table on (X1, X5 | X6)
    and the treated arm is shifted by +2.
    """
    X = np.asarray(X, dtype=float)
    above = X[:, :N_CONTINUOUS] > np.asarray(mu)[None, :]
    x1, x2, x5, x6 = above[:, 0], above[:, 1], above[:, 4], above[:, 5]
    if teh:
        control = np.where(x1, np.where(x2, 20.0, 23.0), np.where(x5, 25.0, 22.0))
        treated = np.where(x1, np.where(x2, 22.0, 20.0), np.where(x5, 25.0, 23.0))
        return control, treated
    shared = np.where(x1, np.where(x5, 22.0, 20.0), np.where(x6, 25.0, 23.0))
    return shared, shared + NO_TEH_SHIFT


def _with_noise(means: Tuple[np.ndarray, np.ndarray], sd: float, seed: int) -> PotentialOutcomes:
    y0_mean, y1_mean = means
    rng = make_rng(seed)
    noise = rng.normal(0.0, sd, size=(2, y0_mean.shape[0]))
    return PotentialOutcomes(y0_mean=y0_mean, y1_mean=y1_mean, y0=y0_mean + noise[0], y1=y1_mean + noise[1])


def attach_outcomes_linear(X: np.ndarray, teh: bool, seed: int) -> PotentialOutcomes:
    """
    Draw both potential outcomes from the linear model.

    The noise standard deviation is 3, which gives the control-arm mean an R²
    of about 0.63 under the regular design.
    """
    return _with_noise(linear_means(X, teh), LINEAR_NOISE_SD, seed)


def attach_outcomes_nonlinear(X: np.ndarray, mu: np.ndarray, teh: bool, seed: int) -> PotentialOutcomes:
    """Draw both potential outcomes from the piecewise-constant model with unit noise variance."""
    return _with_noise(nonlinear_means(X, mu, teh), NONLINEAR_NOISE_SD, seed)


def true_predictive_set(config: ScenarioConfig) -> FrozenSet[int]:
    """
    Covariates whose values change the treatment effect (0-based).

    Returns:
        frozenset: {0, 16, 17, 18, 19, 102, 103, 104} for linear heterogeneity,
        {0, 1, 4} for nonlinear heterogeneity, empty without heterogeneity
    """
    if not config.teh:
        return frozenset()
    if config.linearity is Linearity.LINEAR:
        return frozenset(sorted(set(TREATED_COEFFICIENTS) - set(CONTROL_COEFFICIENTS)))
    return frozenset({0, 1, 4})


def selection_score(X: np.ndarray, linearity: Linearity) -> np.ndarray:
    columns = LINEAR_SCORE_COLUMNS if linearity is Linearity.LINEAR else NONLINEAR_SCORE_COLUMNS
    return np.asarray(X, dtype=float)[:, list(columns)].sum(axis=1)


def selection_bias_sample(X: np.ndarray, config: ScenarioConfig, seed: Optional[int] = None) -> np.ndarray:
    """
    Draw a training sample that over-represents the upper half of a score.

    The score is the sum of X15..X18 (linear) or X1 + X5 (nonlinear). Rows with
    score at most the floor(N/2)-th order statistic form the bottom half; a
    quarter of the sample (rounded down) comes from it uniformly and the rest
    from the top half.

    Args:
        X: N×110 covariates of the candidate population
        config: Scenario supplying n_train and the linearity
        seed: Sampling seed (default: the scenario seed)

    Returns:
        numpy.ndarray: Sorted row indices into X

    Raises:
        SamplingError: If the score is constant or a half cannot supply its quota

    Example:
        >>> rows = selection_bias_sample(draw.X, ScenarioConfig(structure="selection_bias", n_train=200))
        >>> len(rows)
        200
    """
    score = selection_score(X, config.linearity)
    n_pool = score.shape[0]
    if n_pool < 2 or np.ptp(score) == 0.0:
        raise SamplingError("Selection score is constant; the median split is undefined", quota=config.n_train, available=0)

    cutoff = np.sort(score, kind="mergesort")[n_pool // 2 - 1]
    bottom = np.flatnonzero(score <= cutoff)
    top = np.flatnonzero(score > cutoff)

    n_bottom = int(np.floor(BOTTOM_HALF_SHARE * config.n_train))
    n_top = config.n_train - n_bottom
    if n_bottom > bottom.size:
        raise SamplingError(
            f"Bottom half holds {bottom.size} rows, {n_bottom} needed", quota=n_bottom, available=int(bottom.size)
        )
    if n_top > top.size:
        raise SamplingError(f"Top half holds {top.size} rows, {n_top} needed", quota=n_top, available=int(top.size))

    rng = make_rng(config.seed if seed is None else seed)
    chosen = np.concatenate(
        [rng.choice(bottom, size=n_bottom, replace=False), rng.choice(top, size=n_top, replace=False)]
    )
    logger.debug(f"Selection-bias sample: {n_bottom} bottom-half rows, {n_top} top-half rows")
    return np.sort(chosen)


def population_size(config: ScenarioConfig) -> int:
    """Rows drawn per replicate; the selection-bias pool holds twice the training size."""
    if config.structure is Structure.SELECTION_BIAS:
        return config.n_test + 2 * config.n_train
    return config.n_test + config.n_train


def generate(config: ScenarioConfig) -> SimulatedData:
    """
    Draw one replicate of a scenario.

    The test set is a uniform sample of the population. Under the regular and
    correlated structures the remaining rows form the training set; under
    selection bias the training set is drawn from the remaining rows by
    selection_bias_sample.

    Args:
        config: Scenario, including its seed

    Returns:
        SimulatedData: Train/test datasets with ground truth

    Raises:
        SpecError: If the scenario is invalid
        SamplingError: If the selection-bias sampler cannot fill its quotas
    """
    config.validate()
    n = population_size(config)
    draw = draw_covariates(config, n, derive_seed(config.seed, COVARIATE_STREAM))
    T = assign_treatment(n, derive_seed(config.seed, TREATMENT_STREAM))
    noise_seed = derive_seed(config.seed, NOISE_STREAM)
    if config.linearity is Linearity.LINEAR:
        outcomes = attach_outcomes_linear(draw.X, config.teh, noise_seed)
    else:
        outcomes = attach_outcomes_nonlinear(draw.X, draw.mu, config.teh, noise_seed)
    Y = np.where(T == 1, outcomes.y1, outcomes.y0)

    order = make_rng(config.seed, SPLIT_STREAM).permutation(n)
    test_rows = np.sort(order[: config.n_test])
    rest = np.sort(order[config.n_test :])
    if config.structure is Structure.SELECTION_BIAS:
        train_rows = rest[selection_bias_sample(draw.X[rest], config, derive_seed(config.seed, SAMPLING_STREAM))]
    else:
        train_rows = rest

    def dataset(rows: np.ndarray) -> Dataset:
        return Dataset.from_arrays(draw.X[rows], T[rows], Y[rows], names=draw.names, kinds=draw.kinds)

    sim = SimulatedData(
        train=dataset(train_rows),
        test=dataset(test_rows),
        train_truth=GroundTruth.from_outcomes(outcomes.subset(train_rows)),
        test_truth=GroundTruth.from_outcomes(outcomes.subset(test_rows)),
        predictive_set=true_predictive_set(config),
        mu=draw.mu,
        config=config,
    )
    logger.debug(f"Generated {config.label} (seed {config.seed}): train {sim.train.n}, test {sim.test.n}")
    return sim


def _arm_mean(X: np.ndarray, linearity: Linearity, teh: bool, mu: np.ndarray, arm: int) -> np.ndarray:
    if linearity is Linearity.LINEAR:
        means = linear_means(X, teh)
    else:
        means = nonlinear_means(X, mu, teh)
    return means[arm]


def oracle_step1(sim: SimulatedData) -> Tuple[CallableRegressor, CallableRegressor]:
    """True conditional-mean functions of both arms, wrapped as fitted regressors."""
    config = sim.config
    return tuple(
        CallableRegressor(
            function=partial(_arm_mean, linearity=config.linearity, teh=config.teh, mu=sim.mu, arm=arm),
            n_features=sim.train.p,
            label=f"oracle_arm{arm}",
        )
        for arm in (0, 1)
    )


def _truth_frame(split: str, truth: GroundTruth) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "split": split,
            "row": np.arange(truth.z_true.shape[0]),
            "y0_mean": truth.y0_mean,
            "y1_mean": truth.y1_mean,
            "y0": truth.y0,
            "y1": truth.y1,
            "z_true": truth.z_true,
            "optimal_arm_noiseless": truth.optimal_arm_noiseless,
            "optimal_arm_realized": truth.optimal_arm_realized,
        }
    )


def write_simulation(sim: SimulatedData, out_dir: Union[str, Path]) -> List[Path]:
    """
    Write a replicate as train.csv, test.csv, truth.csv and scenario.json.

    Args:
        sim: Replicate to write
        out_dir: Destination directory (created if missing)

    Returns:
        List[Path]: The written files

    Raises:
        OutputError: If the directory or a file cannot be written
    """
    out = ensure_directory_exists(out_dir)
    paths = [write_csv(sim.train, out / "train.csv"), write_csv(sim.test, out / "test.csv")]

    truth_path = out / "truth.csv"
    frame = pd.concat([_truth_frame("train", sim.train_truth), _truth_frame("test", sim.test_truth)])
    try:
        frame.to_csv(truth_path, index=False, lineterminator="\n")
    except OSError as e:
        raise OutputError(f"Cannot write {truth_path}: {e}", path=str(truth_path)) from e
    paths.append(truth_path)

    meta = {
        "scenario": scenario_to_config(sim.config),
        "label": sim.config.label,
        "predictive_set": sorted(sim.predictive_set),
        "feature_names": sim.train.feature_names,
        "mu": [float(v) for v in sim.mu],
    }
    paths.append(write_json(out / "scenario.json", meta))
    logger.info(f"Wrote simulation {sim.config.label} to {out}")
    return paths

