"""Regularization paths over a log-spaced penalty grid."""

from __future__ import annotations

import dataclasses
from collections.abc import Sequence

import numpy as np
import pandas as pd

from knockpipe.core.misc import InputError, get_logger
from knockpipe.modules.sparse_glm.solver import LassoFit, SolverSettings, fit_logistic_lasso, lambda_max

logger = get_logger(__name__)


@dataclasses.dataclass(frozen=True, eq=False)
class LassoPath:
    """Warm-started fits along a decreasing penalty grid.

    Attributes:
        grid: Strictly decreasing penalty levels.
        fits: One fit per grid value.
        entry_level: For every column, the largest grid value at which its coefficient is nonzero (0 if never).
        truncated: Whether the path stopped early because a fit failed.
    """

    grid: np.ndarray
    fits: tuple[LassoFit, ...]
    entry_level: np.ndarray
    truncated: bool = False

    @property
    def coefficients(self) -> np.ndarray:
        """Coefficient matrix with one row per grid value."""
        return np.vstack([fit.beta for fit in self.fits])

    def to_frame(self, column_names: Sequence[str] | None = None) -> pd.DataFrame:
        """Return the path as a table with the penalty, intercept and one column per coefficient."""
        coefficients = self.coefficients
        if column_names is None:
            column_names = [f"beta{j + 1}" for j in range(coefficients.shape[1])]
        names = list(column_names)
        frame = pd.DataFrame(coefficients, columns=names)
        frame.insert(0, "intercept", [fit.intercept for fit in self.fits])
        frame.insert(0, "r", self.grid)
        return frame


def make_grid(r_max: float, grid_size: int, min_ratio: float) -> np.ndarray:
    """Return `grid_size` log-spaced penalties from r_max down to min_ratio * r_max.

    Args:
        r_max: Largest penalty.
        grid_size: Number of grid points, at least 2.
        min_ratio: Ratio of the smallest to the largest penalty, in (0, 1).

    Returns:
        Strictly decreasing grid.

    Raises:
        InputError: If the arguments are out of range.
    """
    if grid_size < 2:
        raise InputError(f"grid_size must be at least 2, got {grid_size}", "sparse_glm", "fit_path")
    if not 0 < min_ratio < 1:
        raise InputError(f"min_ratio must be in (0, 1), got {min_ratio}", "sparse_glm", "fit_path")
    grid = r_max * np.logspace(0, np.log10(min_ratio), grid_size)
    grid[0], grid[-1] = r_max, r_max * min_ratio
    return grid


def entry_levels(grid: np.ndarray, coefficients: np.ndarray) -> np.ndarray:
    """Return, per column, the first (largest) grid value with a nonzero coefficient, or 0.

    Args:
        grid: Decreasing penalty grid.
        coefficients: Matrix with one row per grid value.

    Returns:
        Vector with one entry per column.
    """
    if len(coefficients) == 0:
        return np.zeros(coefficients.shape[1])
    nonzero = coefficients != 0
    first = np.argmax(nonzero, axis=0)
    return np.where(nonzero.any(axis=0), grid[first], 0.0)


def fit_path_on_grid(
    x: np.ndarray, y: np.ndarray, grid: np.ndarray, settings: SolverSettings | None = None
) -> LassoPath:
    """Fit the penalized model at every value of a decreasing grid, warm-starting each fit from the previous.

    The path is truncated at the first fit that does not converge.

    Args:
        x: Standardized design matrix.
        y: Binary response.
        grid: Strictly decreasing penalty levels.
        settings: Solver stopping rules.

    Returns:
        The path.

    Raises:
        InputError: If the grid is not strictly decreasing.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) == 0 or np.any(np.diff(grid) >= 0):
        raise InputError("the penalty grid must be strictly decreasing", "sparse_glm", "fit_path")
    r_max = lambda_max(x, y)
    fits: list[LassoFit] = []
    warm = None
    for r in grid:
        fit = fit_logistic_lasso(x, y, float(r), warm=warm, settings=settings, r_max=r_max)
        if not fit.converged:
            logger.warning("Path truncated at r=%.6g after %d of %d grid points", r, len(fits), len(grid))
            break
        fits.append(fit)
        warm = fit
    truncated = len(fits) < len(grid)
    grid = grid[: len(fits)]
    coefficients = np.vstack([fit.beta for fit in fits]) if fits else np.zeros((0, x.shape[1]))
    _check_continuity(coefficients)
    return LassoPath(grid=grid, fits=tuple(fits), entry_level=entry_levels(grid, coefficients), truncated=truncated)


def fit_path(
    x: np.ndarray,
    y: np.ndarray,
    grid_size: int = 100,
    min_ratio: float = 1e-4,
    settings: SolverSettings | None = None,
) -> LassoPath:
    """Compute the regularization path on a log-spaced grid from lambda_max down to min_ratio * lambda_max.

    Args:
        x: Standardized design matrix (or knockoff-augmented matrix).
        y: Binary response.
        grid_size: Number of penalty levels.
        min_ratio: Ratio of the smallest to the largest penalty.
        settings: Solver stopping rules.

    Returns:
        The path.
    """
    grid = make_grid(lambda_max(x, y), grid_size, min_ratio)
    return fit_path_on_grid(x, y, grid, settings)


def _check_continuity(coefficients: np.ndarray) -> None:
    if len(coefficients) < 3:
        return
    changes = np.max(np.abs(np.diff(coefficients, axis=0)), axis=1)
    median = float(np.median(changes))
    if median > 0 and np.any(changes > 10 * median):
        worst = int(np.argmax(changes))
        logger.warning(
            "Path oscillation: coefficient change %.3g between grid points %d and %d exceeds 10x the median %.3g",
            changes[worst],
            worst + 1,
            worst + 2,
            median,
        )
