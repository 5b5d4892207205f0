"""Calibration of the penalty by K-fold cross-validation."""

from __future__ import annotations

import numpy as np
from joblib import Parallel, delayed

from knockpipe.core.misc import InputError, get_logger
from knockpipe.modules.data_model import FoldAssignment
from knockpipe.modules.sparse_glm.path import fit_path_on_grid
from knockpipe.modules.sparse_glm.solver import SolverSettings, mean_nll

logger = get_logger(__name__)


def _fold_curve(
    x: np.ndarray, y: np.ndarray, train: np.ndarray, valid: np.ndarray, grid: np.ndarray, settings: SolverSettings
) -> np.ndarray:
    """Return the validation mean negative log-likelihood at every grid value (nan past a truncation)."""
    path = fit_path_on_grid(x[train], y[train], grid, settings)
    curve = np.full(len(grid), np.nan)
    for i, fit in enumerate(path.fits):
        curve[i] = mean_nll(x[valid], y[valid], fit.intercept, fit.beta)
    return curve


def cross_validate_lambda(
    x: np.ndarray,
    y: np.ndarray,
    folds: FoldAssignment,
    grid: np.ndarray,
    settings: SolverSettings | None = None,
    n_jobs: int = 1,
) -> tuple[float, np.ndarray]:
    """Choose the penalty minimizing the mean validation negative log-likelihood.

    For every fold a warm-started path is fitted on the remaining observations and evaluated on the fold. Ties
    are broken toward the larger penalty.

    Args:
        x: Standardized design matrix.
        y: Binary response.
        folds: Fold assignment over the rows of x.
        grid: Decreasing penalty grid.
        settings: Solver stopping rules.
        n_jobs: Number of folds fitted in parallel.

    Returns:
        Tuple (r_star, cv_curve), where cv_curve holds the fold-averaged validation loss per grid value.

    Raises:
        InputError: If the folds do not match x or a fold has a constant training response.
    """
    settings = settings or SolverSettings()
    grid = np.asarray(grid, dtype=float)
    if folds.n != len(y):
        raise InputError(
            f"fold assignment covers {folds.n} observations, data has {len(y)}", "sparse_glm", "cross_validate_lambda"
        )
    splits = list(folds.splits())
    for fold, (train, _) in enumerate(splits, start=1):
        if np.ptp(y[train]) == 0:
            raise InputError(
                f"fold {fold} has a constant training response", "sparse_glm", "cross_validate_lambda"
            )

    curves = Parallel(n_jobs=n_jobs)(
        delayed(_fold_curve)(x, y, train, valid, grid, settings) for train, valid in splits
    )
    curves = np.vstack(curves)
    with np.errstate(invalid="ignore"):
        counts = np.sum(~np.isnan(curves), axis=0)
        cv_curve = np.where(counts > 0, np.nansum(curves, axis=0) / np.maximum(counts, 1), np.inf)
    if np.any(counts < len(splits)):
        logger.warning("Some fold paths were truncated; the CV curve averages over the available folds")
    r_star = float(grid[int(np.argmin(cv_curve))])
    logger.debug("CV selected r=%.6g (index %d of %d)", r_star, int(np.argmin(cv_curve)), len(grid))
    return r_star, cv_curve
