"""
Cross-validated convex stacking (super learner).

Candidates are fit on K-1 folds and predict the held-out fold, giving an n×K
matrix of cross-validated predictions Z. The weights minimize ||y - Z w||^2 over
the probability simplex. If a single candidate achieves a lower CV risk than the
combination, the weights collapse onto that candidate.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import minimize
from sklearn.model_selection import KFold

from ..exceptions import FitError
from ..utils.seeding import derive_seed, make_rng
from .specs import SuperLearnerSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StackFit:
    """
    Fitted super learner.

    Attributes:
        candidate_fits: Candidates refit on all rows
        candidate_names: Learner name per candidate
        weights: Simplex weights, one per candidate
        cv_risk: Cross-validated MSE per candidate
        cv_predictions: n×K cross-validated prediction matrix
        stack_risk: Cross-validated MSE of the weighted combination
    """

    candidate_fits: Tuple[object, ...]
    candidate_names: Tuple[str, ...]
    weights: np.ndarray
    cv_risk: np.ndarray
    cv_predictions: np.ndarray
    stack_risk: float

    @property
    def n_features(self) -> Optional[int]:
        return getattr(self.candidate_fits[0], "n_features", None)

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        total = np.zeros(X.shape[0])
        for weight, fit in zip(self.weights, self.candidate_fits):
            if weight != 0.0:
                total += weight * fit.predict(X)
        return total


def _solve_on_support(Z: np.ndarray, y: np.ndarray, support: np.ndarray) -> np.ndarray:
    """Least squares on the columns in ``support`` subject only to sum(w) == 1."""
    Zs = Z[:, support]
    m = support.size
    kkt = np.zeros((m + 1, m + 1))
    kkt[:m, :m] = 2.0 * Zs.T @ Zs
    kkt[:m, m] = 1.0
    kkt[m, :m] = 1.0
    rhs = np.concatenate([2.0 * Zs.T @ y, [1.0]])
    solution = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
    weights = np.zeros(Z.shape[1])
    weights[support] = solution[:m]
    return weights


def simplex_weights(Z: np.ndarray, y: np.ndarray) -> np.ndarray:
    """
    Least-squares weights constrained to the probability simplex.

    SLSQP locates the support of the minimizer; the weights are then solved
    exactly on that support with the sum-to-one constraint, so weights off the
    support are exactly zero.

    Args:
        Z: n×K matrix of candidate predictions
        y: Length-n response

    Returns:
        numpy.ndarray: Length-K nonnegative weights summing to one

    Example:
        >>> simplex_weights(np.column_stack([y, np.zeros_like(y)]), y)
        array([1., 0.])
    """
    n, k = Z.shape
    risks = np.mean((y[:, None] - Z) ** 2, axis=0)
    vertex = np.zeros(k)
    vertex[int(np.argmin(risks))] = 1.0
    if k == 1:
        return vertex

    def risk(w: np.ndarray) -> float:
        return float(np.mean((y - Z @ w) ** 2))

    def gradient(w: np.ndarray) -> np.ndarray:
        return -2.0 * Z.T @ (y - Z @ w) / n

    result = minimize(
        risk,
        np.full(k, 1.0 / k),
        jac=gradient,
        method="SLSQP",
        bounds=[(0.0, 1.0)] * k,
        constraints=[{"type": "eq", "fun": lambda w: w.sum() - 1.0, "jac": lambda w: np.ones_like(w)}],
        options={"ftol": 1e-12, "maxiter": 500},
    )
    if not result.success:
        logger.warning(f"Stacking weights did not converge ({result.message}); using the best single candidate")
        return vertex
    weights = np.clip(result.x, 0.0, None)
    weights /= weights.sum()

    support = np.flatnonzero(weights > 1e-6)
    while support.size:
        polished = _solve_on_support(Z, y, support)
        if np.all(polished >= -1e-12):
            polished = np.clip(polished, 0.0, None)
            polished /= polished.sum()
            if risk(polished) <= risk(weights) + 1e-12:
                weights = polished
            break
        support = support[support != support[int(np.argmin(polished[support]))]]

    if risk(weights) > float(risks.min()):
        return vertex
    return weights


def fit_superlearner(
    X,
    y,
    spec: Optional[SuperLearnerSpec] = None,
    seed: int = 0,
    binary_mask: Optional[np.ndarray] = None,
) -> StackFit:
    """
    Fit a cross-validated convex combination of candidate learners.

    Args:
        X: n×p covariates
        y: Length-n response
        spec: Stacking settings (default SuperLearnerSpec())
        seed: Master seed; fold assignment and every candidate fit use derived seeds
        binary_mask: Columns the LASSO candidates leave unscaled

    Returns:
        StackFit: The fitted ensemble

    Raises:
        FitError: If any candidate fails on any fold (the fold index is attached)
    """
    from .base import fit_regressor

    spec = spec or SuperLearnerSpec()
    spec.validate()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    if n < spec.folds:
        raise FitError(f"SuperLearner needs at least {spec.folds} rows, got {n}", learner="superlearner")

    names = tuple(candidate.name for candidate in spec.candidates)
    Z = np.zeros((n, len(spec.candidates)))
    splitter = KFold(n_splits=spec.folds, shuffle=True, random_state=int(make_rng(seed).integers(2**31 - 1)))
    for fold, (train, test) in enumerate(splitter.split(X)):
        for k, candidate in enumerate(spec.candidates):
            try:
                fit = fit_regressor(
                    candidate, X[train], y[train], seed=derive_seed(seed, 0, fold, k), binary_mask=binary_mask
                )
                Z[test, k] = fit.predict(X[test])
            except Exception as e:
                raise FitError(
                    f"Candidate {names[k]} failed on fold {fold}: {e}",
                    learner=names[k],
                    fold=fold,
                ) from e

    cv_risk = np.mean((y[:, None] - Z) ** 2, axis=0)
    weights = simplex_weights(Z, y)
    stack_risk = float(np.mean((y - Z @ weights) ** 2))

    fits = []
    for k, candidate in enumerate(spec.candidates):
        try:
            fits.append(fit_regressor(candidate, X, y, seed=derive_seed(seed, 1, k), binary_mask=binary_mask))
        except Exception as e:
            raise FitError(f"Candidate {names[k]} failed on the full data: {e}", learner=names[k]) from e

    summary = ", ".join(f"{name}={w:.3f}" for name, w in zip(names, weights))
    logger.info(f"SuperLearner weights: {summary} (CV risk {stack_risk:.4g})")
    return StackFit(
        candidate_fits=tuple(fits),
        candidate_names=names,
        weights=weights,
        cv_risk=cv_risk,
        cv_predictions=Z,
        stack_risk=stack_risk,
    )
