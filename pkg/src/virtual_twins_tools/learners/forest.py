"""
Bootstrap regression forest tuned by out-of-bag error.

Each tree is a CART regression tree grown on a bootstrap resample. At every
node ``mtry`` candidate columns are drawn without replacement; a node is split
while it holds more than ``nodesize`` rows and its outcomes are not constant.
The (mtry, nodesize) grid point with the smallest OOB mean squared error wins.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..exceptions import FitError
from ..utils.seeding import derive_seed
from .cart import CartTree, TreeGrower, best_split
from .specs import ForestSpec

logger = logging.getLogger(__name__)


def default_mtry_grid(p: int) -> Tuple[int, ...]:
    """
    Default candidate mtry values floor(p/3), floor(sqrt(p)), floor(2p/3).

    Values are clipped to [1, p] and deduplicated, keeping first occurrence.

    Example:
        >>> default_mtry_grid(110)
        (36, 10, 73)
    """
    raw = (p // 3, math.isqrt(p), (2 * p) // 3)
    grid: List[int] = []
    for value in raw:
        value = min(max(int(value), 1), p)
        if value not in grid:
            grid.append(value)
    return tuple(grid)


def resolve_mtry_grid(spec: ForestSpec, p: int) -> Tuple[int, ...]:
    if spec.mtry_grid is not None:
        return tuple(min(max(int(m), 1), p) for m in spec.mtry_grid)
    if not spec.tune_mtry:
        return (max(p // 3, 1),)
    return default_mtry_grid(p)


@dataclass(frozen=True)
class ForestFit:
    """
    Fitted forest at the selected grid point.

    Attributes:
        trees: Grown trees
        in_bag: Row indices used by each tree (bootstrap draws, with repeats)
        mtry: Selected number of candidate columns per split
        nodesize: Selected minimum splittable node size
        oob_mse: OOB mean squared error at the selected point (nan without bootstrap)
        grid_oob_mse: OOB error for every evaluated (mtry, nodesize) pair
    """

    trees: Tuple[CartTree, ...]
    in_bag: Tuple[np.ndarray, ...]
    mtry: int
    nodesize: int
    oob_mse: float
    grid_oob_mse: Tuple[Tuple[int, int, float], ...] = ()

    @property
    def n_features(self) -> int:
        return self.trees[0].n_features

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        total = np.zeros(X.shape[0])
        for tree in self.trees:
            total += tree.predict(X)
        return total / len(self.trees)


def _grow_forest(
    X: np.ndarray,
    y: np.ndarray,
    n_trees: int,
    mtry: int,
    nodesize: int,
    bootstrap: bool,
    rng: np.random.Generator,
) -> Tuple[List[CartTree], List[np.ndarray], float]:
    n, p = X.shape
    trees: List[CartTree] = []
    in_bag: List[np.ndarray] = []
    oob_sum = np.zeros(n)
    oob_count = np.zeros(n, dtype=np.int64)

    def find_split(rows: np.ndarray, depth: int):
        features = np.sort(rng.choice(p, size=mtry, replace=False))
        return best_split(X[rows], y[rows], features, min_leaf=1)

    grower = TreeGrower(find_split, max_depth=None, min_split=nodesize + 1)
    for _ in range(n_trees):
        rows = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        tree = grower.grow(X, y, rows)
        trees.append(tree)
        in_bag.append(rows)
        if bootstrap:
            out = np.ones(n, dtype=bool)
            out[rows] = False
            if out.any():
                oob_sum[out] += tree.predict(X[out])
                oob_count[out] += 1

    scored = oob_count > 0
    if bootstrap and scored.any():
        oob_mse = float(np.mean((y[scored] - oob_sum[scored] / oob_count[scored]) ** 2))
    else:
        oob_mse = float("nan")
    return trees, in_bag, oob_mse


def fit_forest(X, y, spec: Optional[ForestSpec] = None, seed: int = 0) -> ForestFit:
    """
    Fit a bootstrap forest, tuning (mtry, nodesize) by OOB error.

    Every grid point receives its own random stream derived from ``seed``, so the
    result does not depend on the order in which grid points are evaluated.
    Ties in OOB error go to the earliest grid point (mtry-major order).

    Args:
        X: n×p covariates
        y: Length-n response
        spec: Learner settings (default ForestSpec())
        seed: Master seed for bootstrap draws and feature sampling

    Returns:
        ForestFit: The forest at the selected grid point

    Raises:
        FitError: If n < 2, inputs are not finite, or the grid is empty or unusable

    Example:
        >>> fit = fit_forest(X, y, ForestSpec(n_trees=50), seed=3)
        >>> fit.mtry in default_mtry_grid(X.shape[1])
        True
    """
    spec = spec or ForestSpec()
    spec.validate()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise FitError(f"Shapes do not match: X {X.shape}, y {y.shape}", learner="forest")
    n, p = X.shape
    if n < 2:
        raise FitError(f"Forest needs at least 2 rows, got {n}", learner="forest")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise FitError("Forest inputs contain non-finite values", learner="forest")

    grid = [(m, s) for m in resolve_mtry_grid(spec, p) for s in spec.nodesize_grid]
    if not grid:
        raise FitError("Forest tuning grid is empty", learner="forest")
    if not spec.bootstrap and len(grid) > 1:
        raise FitError("Without bootstrap the forest grid must hold a single point", learner="forest")

    best = None
    scores = []
    for index, (mtry, nodesize) in enumerate(grid):
        rng = np.random.default_rng(derive_seed(seed, index))
        trees, in_bag, oob_mse = _grow_forest(X, y, spec.n_trees, mtry, nodesize, spec.bootstrap, rng)
        scores.append((mtry, nodesize, oob_mse))
        logger.debug(f"Forest grid point mtry={mtry}, nodesize={nodesize}: OOB MSE {oob_mse:.4g}")
        if best is None or oob_mse < best[3] or (np.isnan(best[3]) and not np.isnan(oob_mse)):
            best = (trees, in_bag, (mtry, nodesize), oob_mse)

    trees, in_bag, (mtry, nodesize), oob_mse = best
    logger.info(f"Forest selected mtry={mtry}, nodesize={nodesize} (OOB MSE {oob_mse:.4g})")
    return ForestFit(
        trees=tuple(trees),
        in_bag=tuple(in_bag),
        mtry=mtry,
        nodesize=nodesize,
        oob_mse=oob_mse,
        grid_oob_mse=tuple(scores),
    )
