"""
LASSO regression by cyclic coordinate descent.

Continuous columns are standardized with population standard deviations before
fitting; binary columns enter unscaled. All columns are centered internally so
the intercept is never penalized. The penalty is chosen by K-fold
cross-validation over a log-spaced path from lambda_max down to
epsilon * lambda_max, and coefficients are reported on the original scale.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from sklearn.model_selection import KFold

from ..data.models import StandardizationParams, standardize_apply, standardize_fit
from ..exceptions import FitError
from ..utils.seeding import make_rng
from .specs import LambdaRule, LassoSpec

logger = logging.getLogger(__name__)


def soft_threshold(value, penalty: float):
    """
    Soft-thresholding operator sign(v) * max(|v| - penalty, 0).

    Example:
        >>> soft_threshold(np.array([3.0, -0.5]), 1.0)
        array([ 2., -0.])
    """
    return np.sign(value) * np.maximum(np.abs(value) - penalty, 0.0)


@dataclass(frozen=True)
class _Design:
    params: StandardizationParams
    Z: np.ndarray
    z_mean: np.ndarray
    y_mean: float
    y_var: float
    gram: np.ndarray
    corr: np.ndarray


def _prepare(X: np.ndarray, y: np.ndarray, binary_mask: Optional[np.ndarray]) -> _Design:
    params = standardize_fit(X, binary_mask)
    Z = standardize_apply(params, X)
    z_mean = Z.mean(axis=0)
    Zc = Z - z_mean
    y_mean = float(y.mean())
    n = X.shape[0]
    gram = (Zc.T @ Zc) / n
    corr = Zc.T @ (y - y_mean) / n
    return _Design(
        params=params, Z=Zc, z_mean=z_mean, y_mean=y_mean, y_var=float(np.var(y)), gram=gram, corr=corr
    )


def lambda_max(X, y, binary_mask: Optional[np.ndarray] = None) -> float:
    """
    Smallest penalty at which every LASSO coefficient is zero.

    Computed on the standardized design as max_j |<x_j, y - mean(y)>| / n.

    Args:
        X: n×p covariates
        y: Length-n response
        binary_mask: Optional mask of columns left unscaled

    Returns:
        float: lambda_max (0 when y or every column is constant)
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    design = _prepare(X, y, binary_mask)
    return float(np.max(np.abs(design.corr))) if design.corr.size else 0.0


def _sweep(
    coords: np.ndarray,
    beta: np.ndarray,
    grad: np.ndarray,
    gram: np.ndarray,
    diag: np.ndarray,
    penalty: float,
) -> float:
    """One coordinate pass over ``coords``; returns the largest diag_j * delta_j**2."""
    largest = 0.0
    for j in coords:
        old = beta[j]
        rho = grad[j] + diag[j] * old
        if rho > penalty:
            new = (rho - penalty) / diag[j]
        elif rho < -penalty:
            new = (rho + penalty) / diag[j]
        else:
            new = 0.0
        if new != old:
            delta = new - old
            beta[j] = new
            np.subtract(grad, gram[j] * delta, out=grad)
            largest = max(largest, diag[j] * delta * delta)
    return largest


def _coordinate_descent(
    gram: np.ndarray,
    corr: np.ndarray,
    penalty: float,
    beta: np.ndarray,
    tol: float,
    max_iter: int,
    y_var: float = 1.0,
) -> np.ndarray:
    """
    Minimize (1/2n)||y - Z b||^2 + penalty * ||b||_1 in covariance form.

    ``gram`` is Z'Z/n and ``corr`` is Z'y/n for the centered design. The
    gradient g = corr - gram @ beta is kept current in place. A full pass is
    followed by passes over the active set until they settle, then the full
    pass is repeated. Converged when a full pass moves no coordinate by more
    than ``tol * y_var`` in weighted squared change. ``max_iter`` bounds the
    total number of passes.
    """
    beta = beta.copy()
    diag = np.diag(gram).copy()
    grad = corr - gram @ beta
    threshold = tol * y_var
    all_coords = np.flatnonzero(diag > 0)

    passes = 0
    while passes < max_iter:
        passes += 1
        if _sweep(all_coords, beta, grad, gram, diag, penalty) <= threshold:
            return beta
        active = np.flatnonzero(beta != 0)
        while passes < max_iter:
            passes += 1
            if _sweep(active, beta, grad, gram, diag, penalty) <= threshold:
                break
    logger.warning(f"Coordinate descent did not converge at lambda={penalty:.4g} after {max_iter} passes")
    return beta


def _solve_path(design: _Design, lambdas: np.ndarray, tol: float, max_iter: int) -> np.ndarray:
    """Warm-started path on the standardized scale; returns a p×L coefficient matrix."""
    p = design.gram.shape[0]
    path = np.zeros((p, lambdas.size))
    beta = np.zeros(p)
    for i, penalty in enumerate(lambdas):
        beta = _coordinate_descent(design.gram, design.corr, float(penalty), beta, tol, max_iter, design.y_var)
        path[:, i] = beta
    return path


def _to_original_scale(design: _Design, beta_std: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Map standardized coefficients (p or p×L) back to original-scale slopes and intercepts."""
    scales = design.params.scales
    means = design.params.means
    beta = beta_std / (scales[:, None] if beta_std.ndim == 2 else scales)
    x_mean = design.z_mean * scales + means
    intercept = design.y_mean - x_mean @ beta
    return beta, intercept


def _lambda_path(lmax: float, n: int, p: int, spec: LassoSpec) -> np.ndarray:
    epsilon = spec.epsilon if spec.epsilon is not None else (1e-3 if n > p else 1e-2)
    if spec.n_lambda == 1:
        return np.array([lmax])
    return lmax * np.logspace(0.0, np.log10(epsilon), spec.n_lambda)


@dataclass(frozen=True)
class LassoFit:
    """
    Fitted LASSO with its cross-validation record.

    Attributes:
        intercept: Intercept at the chosen penalty (original scale)
        coefficients: Length-p slopes at the chosen penalty (original scale)
        lambda_path: Decreasing penalty values
        lambda_chosen: Penalty selected by ``rule``
        lambda_min: Penalty with the smallest mean CV error
        lambda_1se: Largest penalty within one standard error of the minimum
        cv_mean: Mean CV error per penalty
        cv_se: Standard error of the CV error per penalty
        coef_path: p×L slopes along the path (original scale)
        intercept_path: Length-L intercepts along the path
        standardization: Parameters used to standardize the design
        rule: Rule used to choose the penalty
    """

    intercept: float
    coefficients: np.ndarray
    lambda_path: np.ndarray
    lambda_chosen: float
    lambda_min: float
    lambda_1se: float
    cv_mean: np.ndarray
    cv_se: np.ndarray
    coef_path: np.ndarray
    intercept_path: np.ndarray
    standardization: StandardizationParams
    rule: LambdaRule = LambdaRule.LAMBDA_1SE

    @property
    def n_features(self) -> int:
        return int(self.coefficients.shape[0])

    @property
    def chosen_index(self) -> int:
        return int(np.flatnonzero(self.lambda_path == self.lambda_chosen)[0])

    def active_set(self) -> np.ndarray:
        """Indices of nonzero coefficients at the chosen penalty."""
        return np.flatnonzero(self.coefficients != 0)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.intercept + np.asarray(X, dtype=float) @ self.coefficients


def _check_inputs(X: np.ndarray, y: np.ndarray) -> None:
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise FitError(f"Shapes do not match: X {X.shape}, y {y.shape}", learner="lasso")
    if X.shape[1] < 1:
        raise FitError("LASSO needs at least one covariate", learner="lasso")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise FitError("LASSO inputs contain non-finite values", learner="lasso")


def fit_lasso_at(X, y, penalty: float, binary_mask: Optional[np.ndarray] = None, spec: Optional[LassoSpec] = None):
    """
    Fit the LASSO at one fixed penalty.

    Args:
        X: n×p covariates
        y: Length-n response
        penalty: Penalty on the standardized scale
        binary_mask: Optional mask of columns left unscaled
        spec: Solver tolerances (defaults from LassoSpec)

    Returns:
        Tuple (intercept, coefficients) on the original scale
    """
    spec = spec or LassoSpec()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_inputs(X, y)
    design = _prepare(X, y, binary_mask)
    beta = _coordinate_descent(
        design.gram, design.corr, float(penalty), np.zeros(X.shape[1]), spec.tol, spec.max_iter, design.y_var
    )
    coefficients, intercept = _to_original_scale(design, beta)
    return float(intercept), coefficients


def fit_lasso(
    X,
    y,
    spec: Optional[LassoSpec] = None,
    seed: int = 0,
    binary_mask: Optional[np.ndarray] = None,
) -> LassoFit:
    """
    Fit a cross-validated LASSO.

    The full-data penalty path is reused in every fold. Each fold standardizes
    its own training rows. The 1SE rule picks the largest penalty whose mean CV
    error is within one standard error of the minimum.

    Args:
        X: n×p covariates
        y: Length-n response
        spec: Learner settings (default LassoSpec())
        seed: Seed for the fold assignment
        binary_mask: Optional mask of columns left unscaled

    Returns:
        LassoFit: The fitted model

    Raises:
        FitError: If n < folds or inputs are not finite

    Example:
        >>> fit = fit_lasso(X, y, LassoSpec(folds=5), seed=1)
        >>> fit.lambda_1se >= fit.lambda_min
        True
    """
    spec = spec or LassoSpec()
    spec.validate()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_inputs(X, y)
    n, p = X.shape
    if n < spec.folds:
        raise FitError(f"LASSO needs at least {spec.folds} rows, got {n}", learner="lasso")

    design = _prepare(X, y, binary_mask)
    lmax = float(np.max(np.abs(design.corr)))

    if lmax <= 0.0:
        logger.warning("Outcome has no association with any covariate; returning the intercept-only LASSO")
        lambdas = _lambda_path(1.0, n, p, spec)
        zeros = np.zeros(lambdas.size)
        return LassoFit(
            intercept=design.y_mean,
            coefficients=np.zeros(p),
            lambda_path=lambdas,
            lambda_chosen=float(lambdas[0]),
            lambda_min=float(lambdas[0]),
            lambda_1se=float(lambdas[0]),
            cv_mean=zeros,
            cv_se=zeros.copy(),
            coef_path=np.zeros((p, lambdas.size)),
            intercept_path=np.full(lambdas.size, design.y_mean),
            standardization=design.params,
            rule=LambdaRule(spec.rule),
        )

    lambdas = _lambda_path(lmax, n, p, spec)
    path_std = _solve_path(design, lambdas, spec.tol, spec.max_iter)
    coef_path, intercept_path = _to_original_scale(design, path_std)

    splitter = KFold(n_splits=spec.folds, shuffle=True, random_state=int(make_rng(seed).integers(2**31 - 1)))
    fold_errors = np.zeros((spec.folds, lambdas.size))
    for fold, (train, test) in enumerate(splitter.split(X)):
        fold_design = _prepare(X[train], y[train], binary_mask)
        fold_std = _solve_path(fold_design, lambdas, spec.tol, spec.max_iter)
        fold_coef, fold_intercept = _to_original_scale(fold_design, fold_std)
        predictions = X[test] @ fold_coef + fold_intercept
        fold_errors[fold] = np.mean((y[test, None] - predictions) ** 2, axis=0)
        logger.debug(f"LASSO fold {fold}: best CV error {fold_errors[fold].min():.4g}")

    cv_mean = fold_errors.mean(axis=0)
    cv_se = fold_errors.std(axis=0, ddof=1) / np.sqrt(spec.folds)
    i_min = int(np.argmin(cv_mean))
    i_1se = int(np.flatnonzero(cv_mean <= cv_mean[i_min] + cv_se[i_min])[0])
    i_chosen = i_1se if LambdaRule(spec.rule) is LambdaRule.LAMBDA_1SE else i_min

    logger.info(
        f"LASSO chose lambda={lambdas[i_chosen]:.4g} ({LambdaRule(spec.rule).value}) "
        f"with {int(np.count_nonzero(coef_path[:, i_chosen]))} active of {p}"
    )
    return LassoFit(
        intercept=float(intercept_path[i_chosen]),
        coefficients=coef_path[:, i_chosen].copy(),
        lambda_path=lambdas,
        lambda_chosen=float(lambdas[i_chosen]),
        lambda_min=float(lambdas[i_min]),
        lambda_1se=float(lambdas[i_1se]),
        cv_mean=cv_mean,
        cv_se=cv_se,
        coef_path=coef_path,
        intercept_path=intercept_path,
        standardization=design.params,
        rule=LambdaRule(spec.rule),
    )
