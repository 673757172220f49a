"""
Multivariate adaptive regression splines.

The forward pass greedily adds hinge-function products h(x_j - c) and
h(c - x_j) of an existing parent term, choosing the (parent, variable, knot)
with the largest drop in residual sum of squares. Candidates are scored
against an orthonormal basis of the current terms, so each step costs one
projection per candidate column. The backward pass deletes terms one at a time
(lowest resulting RSS first) and keeps the subset with the smallest
generalized cross-validation score.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..exceptions import FitError
from .specs import MarsSpec

logger = logging.getLogger(__name__)

_DEPENDENCE_TOL = 1e-10


@dataclass(frozen=True)
class Hinge:
    """
    One hinge factor max(0, sign * (x[variable] - knot)).

    Attributes:
        variable: Column index
        knot: Observed data value where the hinge bends
        sign: +1 for h(x - c), -1 for h(c - x)
    """

    variable: int
    knot: float
    sign: int

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        return np.maximum(0.0, self.sign * (X[:, self.variable] - self.knot))

    def describe(self, names: Optional[List[str]] = None) -> str:
        name = names[self.variable] if names else f"x{self.variable}"
        return f"h({name}-{self.knot:.4g})" if self.sign > 0 else f"h({self.knot:.4g}-{name})"


@dataclass(frozen=True)
class Term:
    """Product of hinge factors; the empty product is the intercept."""

    factors: Tuple[Hinge, ...] = ()

    @property
    def degree(self) -> int:
        return len(self.factors)

    @property
    def variables(self) -> Tuple[int, ...]:
        return tuple(f.variable for f in self.factors)

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        values = np.ones(X.shape[0])
        for factor in self.factors:
            values = values * factor.evaluate(X)
        return values

    def describe(self, names: Optional[List[str]] = None) -> str:
        return "*".join(f.describe(names) for f in self.factors) or "(Intercept)"


def gcv(rss: float, n: int, n_terms: int, degree: int = 1) -> float:
    """
    Generalized cross-validation score RSS / (n * (1 - C/n)^2).

    The effective number of parameters is C = M + d * (M - 1) / 2 with M the
    number of terms including the intercept, d = 2 for additive models and 3
    otherwise. Returns inf when C >= n.

    Example:
        >>> gcv(5.0, 10, 3, degree=2)
        3.125
    """
    penalty = 2.0 if degree == 1 else 3.0
    effective = n_terms + penalty * (n_terms - 1) / 2.0
    if effective >= n:
        return math.inf
    return rss / (n * (1.0 - effective / n) ** 2)


def default_spans(n: int, p: int, alpha: float = 0.05) -> Tuple[int, int]:
    """
    Knot min-span and end-span derived from the sample size and dimension.

    Returns:
        Tuple (min_span, end_span), each at least 1 and 0 respectively
    """
    min_span = int(math.floor(-math.log2(-(1.0 / (p * n)) * math.log(1.0 - alpha)) / 2.5))
    end_span = int(math.floor(3.0 - math.log2(alpha / p)))
    return max(min_span, 1), max(end_span, 0)


def candidate_knots(values: np.ndarray, min_span: int, end_span: int) -> np.ndarray:
    """
    Candidate knots for one variable: its distinct observed values, trimmed at
    both ends by ``end_span``, thinned to every ``min_span``-th value, never
    including the maximum. Falls back to all distinct values but the maximum
    when trimming leaves nothing.
    """
    distinct = np.unique(values)
    if distinct.size < 2:
        return distinct[:0]
    full = distinct[:-1]
    stop = distinct.size - max(end_span, 1)
    trimmed = distinct[end_span:stop:min_span] if stop > end_span else distinct[:0]
    return trimmed if trimmed.size else full


@dataclass(frozen=True)
class MarsFit:
    """
    Fitted MARS model after backward pruning.

    Attributes:
        terms: Selected non-intercept basis terms
        intercept: Intercept coefficient
        coefficients: One coefficient per selected term
        gcv: GCV score of the selected model
        rss: Training RSS of the selected model
        forward_rss: Training RSS after each forward step, starting from the intercept-only model
        n_features: Number of training columns
        degree: Maximum interaction degree allowed during fitting
    """

    terms: Tuple[Term, ...]
    intercept: float
    coefficients: np.ndarray
    gcv: float
    rss: float
    forward_rss: Tuple[float, ...]
    n_features: int
    degree: int = 1

    def basis(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if not self.terms:
            return np.zeros((X.shape[0], 0))
        return np.column_stack([term.evaluate(X) for term in self.terms])

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.intercept + self.basis(X) @ self.coefficients

    def selected_variables(self) -> List[int]:
        return sorted({v for term in self.terms for v in term.variables})


def _residualize(Q: np.ndarray, columns: np.ndarray) -> np.ndarray:
    return columns - Q @ (Q.T @ columns)


def _pair_reduction(U: np.ndarray, V: np.ndarray, r: np.ndarray, scale: np.ndarray, single: bool):
    """
    RSS reduction of adding each hinge pair (U[:, k], V[:, k]) to the basis.

    U and V are already residualized against the current basis. Columns whose
    residual norm is negligible relative to their raw norm are dropped.

    Returns:
        Tuple (reduction, use_u, use_v) arrays of length K
    """
    uu = np.einsum("ik,ik->k", U, U)
    vv = np.einsum("ik,ik->k", V, V)
    uv = np.einsum("ik,ik->k", U, V)
    ur = r @ U
    vr = r @ V

    u_ok = uu > _DEPENDENCE_TOL * np.maximum(scale[0], 1.0)
    v_ok = vv > _DEPENDENCE_TOL * np.maximum(scale[1], 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        red_u = np.where(u_ok, ur**2 / np.where(u_ok, uu, 1.0), 0.0)
        red_v = np.where(v_ok, vr**2 / np.where(v_ok, vv, 1.0), 0.0)
        if single:
            use_u = red_u >= red_v
            return np.where(use_u, red_u, red_v), use_u & u_ok, ~use_u & v_ok

        det = uu * vv - uv**2
        both = u_ok & v_ok & (det > _DEPENDENCE_TOL * np.maximum(uu * vv, 1e-300))
        red_pair = np.where(both, (vv * ur**2 - 2.0 * uv * ur * vr + uu * vr**2) / np.where(both, det, 1.0), 0.0)

    reduction = np.where(both, red_pair, np.maximum(red_u, red_v))
    use_u = both | (~both & u_ok & (red_u >= red_v))
    use_v = both | (~both & v_ok & (red_v > red_u))
    return reduction, use_u, use_v


def _append_orthonormal(Q: np.ndarray, column: np.ndarray) -> Tuple[np.ndarray, bool]:
    residual = _residualize(Q, column[:, None])[:, 0]
    residual = _residualize(Q, residual[:, None])[:, 0]
    norm = float(np.linalg.norm(residual))
    if norm <= math.sqrt(_DEPENDENCE_TOL) * max(float(np.linalg.norm(column)), 1.0):
        return Q, False
    return np.column_stack([Q, residual / norm]), True


def _forward_pass(X: np.ndarray, y: np.ndarray, spec: MarsSpec) -> Tuple[List[Term], List[float]]:
    n, p = X.shape
    if spec.min_span is None or spec.end_span is None:
        auto_min, auto_end = default_spans(n, p)
    min_span = spec.min_span if spec.min_span is not None else auto_min
    end_span = spec.end_span if spec.end_span is not None else auto_end

    terms: List[Term] = [Term()]
    columns = [np.ones(n)]
    Q = np.ones((n, 1)) / math.sqrt(n)
    r = y - Q @ (Q.T @ y)
    tss = float(r @ r)
    rss_history = [tss]
    if tss <= 0.0:
        return terms, rss_history

    while len(terms) < spec.max_terms:
        single = len(terms) + 2 > spec.max_terms
        best = None
        for parent_index, parent in enumerate(terms):
            if parent.degree >= spec.degree:
                continue
            parent_values = columns[parent_index]
            support = parent_values > 0
            for j in range(p):
                if j in parent.variables:
                    continue
                knots = candidate_knots(X[support, j], min_span, end_span)
                if knots.size == 0:
                    continue
                shifted = X[:, j][:, None] - knots[None, :]
                U_raw = parent_values[:, None] * np.maximum(0.0, shifted)
                V_raw = parent_values[:, None] * np.maximum(0.0, -shifted)
                scale = (np.einsum("ik,ik->k", U_raw, U_raw), np.einsum("ik,ik->k", V_raw, V_raw))
                reduction, use_u, use_v = _pair_reduction(
                    _residualize(Q, U_raw), _residualize(Q, V_raw), r, scale, single
                )
                usable = use_u | use_v
                if not usable.any():
                    continue
                reduction = np.where(usable, reduction, -np.inf)
                k = int(np.argmax(reduction))
                candidate = (float(reduction[k]), j, float(knots[k]), parent_index, bool(use_u[k]), bool(use_v[k]))
                if best is None or _better(candidate, best):
                    best = candidate

        if best is None or best[0] <= 0.0:
            break
        reduction, j, knot, parent_index, use_u, use_v = best
        if reduction / tss < spec.threshold:
            logger.debug(f"MARS forward pass stopped: R-squared gain {reduction / tss:.2e} below threshold")
            break

        parent = terms[parent_index]
        n_before = len(terms)
        for sign, use in ((1, use_u), (-1, use_v)):
            if not use or len(terms) >= spec.max_terms:
                continue
            term = Term(parent.factors + (Hinge(variable=j, knot=knot, sign=sign),))
            values = term.evaluate(X)
            Q, added = _append_orthonormal(Q, values)
            if added:
                terms.append(term)
                columns.append(values)
        if len(terms) == n_before:
            break
        r = y - Q @ (Q.T @ y)
        rss = float(r @ r)
        rss_history.append(min(rss, rss_history[-1]))
        if rss <= 1e-12 * tss:
            break

    return terms, rss_history


def _better(candidate: tuple, incumbent: tuple) -> bool:
    """Larger reduction, then lower variable, then smaller knot, then lower parent."""
    if candidate[0] != incumbent[0]:
        return candidate[0] > incumbent[0]
    return (candidate[1], candidate[2], candidate[3]) < (incumbent[1], incumbent[2], incumbent[3])


def _least_squares(B: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, float]:
    coef, _, _, _ = np.linalg.lstsq(B, y, rcond=None)
    resid = y - B @ coef
    return coef, float(resid @ resid)


def _backward_pass(X: np.ndarray, y: np.ndarray, terms: List[Term], degree: int):
    n = X.shape[0]
    B_full = np.column_stack([term.evaluate(X) for term in terms])
    kept = list(range(len(terms)))
    coef, rss = _least_squares(B_full, y)
    best = (gcv(rss, n, len(kept), degree), list(kept), coef, rss)

    while len(kept) > 1:
        trial = None
        for position in range(1, len(kept)):
            subset = kept[:position] + kept[position + 1 :]
            sub_coef, sub_rss = _least_squares(B_full[:, subset], y)
            if trial is None or sub_rss < trial[1]:
                trial = (subset, sub_rss, sub_coef)
        kept, rss, coef = trial
        score = gcv(rss, n, len(kept), degree)
        if score < best[0]:
            best = (score, list(kept), coef, rss)
    return best


def fit_mars(X, y, spec: Optional[MarsSpec] = None, seed: int = 0) -> MarsFit:
    """
    Fit a MARS model with forward selection and GCV backward pruning.

    Args:
        X: n×p covariates
        y: Length-n response
        spec: Learner settings (default MarsSpec())
        seed: Unused; MARS is deterministic

    Returns:
        MarsFit: The pruned model

    Raises:
        FitError: If n < 4 or inputs are not finite

    Example:
        >>> fit = fit_mars(x.reshape(-1, 1), 2 * x)
        >>> fit.rss < 1e-8
        True
    """
    spec = spec or MarsSpec()
    spec.validate()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise FitError(f"Shapes do not match: X {X.shape}, y {y.shape}", learner="mars")
    n, p = X.shape
    if n < 4:
        raise FitError(f"MARS needs at least 4 rows, got {n}", learner="mars")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise FitError("MARS inputs contain non-finite values", learner="mars")

    terms, forward_rss = _forward_pass(X, y, spec)
    score, kept, coef, rss = _backward_pass(X, y, terms, spec.degree)
    selected = [terms[i] for i in kept]
    logger.info(
        f"MARS kept {len(selected) - 1} of {len(terms) - 1} terms "
        f"(GCV {score:.4g}, forward RSS {forward_rss[0]:.4g} -> {forward_rss[-1]:.4g})"
    )
    return MarsFit(
        terms=tuple(selected[1:]),
        intercept=float(coef[0]),
        coefficients=np.asarray(coef[1:], dtype=float),
        gcv=float(score),
        rss=float(rss),
        forward_rss=tuple(forward_rss),
        n_features=p,
        degree=spec.degree,
    )
