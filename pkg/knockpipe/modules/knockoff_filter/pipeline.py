"""End-to-end selection procedures: knockoff filters and baselines."""

from __future__ import annotations

import dataclasses
from collections.abc import Sequence

import numpy as np
from joblib import Parallel, delayed

from knockpipe.core.misc import ComputationError, InputError, get_logger, spawn_seeds
from knockpipe.modules.data_model import Dataset, make_folds
from knockpipe.modules.gaussian_knockoffs import KnockoffModel, fit_knockoff_model, sample_knockoffs
from knockpipe.modules.knockoff_filter.selection import SelectionResult, Variant, aggregate_afdr, threshold
from knockpipe.modules.knockoff_filter.statistics import WStatistics, lcd_statistics, lsm_statistics
from knockpipe.modules.sparse_glm import (
    LassoFit,
    SolverSettings,
    cross_validate_lambda,
    fit_path,
    fit_path_on_grid,
    lambda_max,
    make_grid,
)

logger = get_logger(__name__)

STATISTICS = ("lsm", "lcd-cv")

# Method name -> (label, statistic, aggregated)
METHODS = {
    "lasso-cv": ("LASSO", None, False),
    "fdr-lsm": ("FDR LSM", "lsm", False),
    "afdr-lsm": ("AFDR LSM", "lsm", True),
    "fdr-lcd-cv": ("FDR LCD_CV", "lcd-cv", False),
    "afdr-lcd-cv": ("AFDR LCD_CV", "lcd-cv", True),
    "full": ("Full", None, False),
    "empty": ("Empty", None, False),
}


@dataclasses.dataclass(frozen=True)
class PipelineSettings:
    """Parameters of the selection procedures.

    Attributes:
        q: Target (aggregated) FDR level.
        k: Number of knockoff runs whose selections are united.
        variant: Threshold variant.
        statistic: 'lsm' or 'lcd-cv'.
        slack: Factor applied to the equicorrelated s-vector.
        shrinkage_ladder: Covariance shrinkage levels.
        min_eigenvalue: Smallest accepted covariance eigenvalue.
        solver: Coordinate descent stopping rules.
        grid_size: Number of penalty levels on a path.
        min_ratio: Ratio of the smallest to the largest penalty.
        cv_folds: Number of folds for penalty calibration.
        stratify: Stratify the calibration folds by the response.
        n_jobs: Number of parallel workers.
    """

    q: float = 0.1
    k: int = 3
    variant: Variant = Variant.knockoff_plus
    statistic: str = "lsm"
    slack: float = 0.999
    shrinkage_ladder: tuple[float, ...] = (0.0, 1e-4, 1e-3, 1e-2, 1e-1)
    min_eigenvalue: float = 1e-6
    solver: SolverSettings = SolverSettings()
    grid_size: int = 100
    min_ratio: float = 1e-4
    cv_folds: int = 10
    stratify: bool = True
    n_jobs: int = 1

    def __post_init__(self) -> None:
        """Validate the settings.

        Raises:
            InputError: If a value is out of range.
        """
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "shrinkage_ladder", tuple(self.shrinkage_ladder))
        if not 0 <= self.q <= 1:
            raise InputError(f"q must be in [0, 1], got {self.q}", "knockoff_filter", "PipelineSettings")
        if self.k < 1:
            raise InputError(f"k must be at least 1, got {self.k}", "knockoff_filter", "PipelineSettings")
        if self.statistic not in STATISTICS:
            raise InputError(
                f"unknown statistic {self.statistic!r}, expected one of {', '.join(STATISTICS)}",
                "knockoff_filter",
                "PipelineSettings",
            )

    @classmethod
    def from_config(cls, cfg: dict) -> PipelineSettings:
        """Create settings from a full (merged and validated) config.

        Args:
            cfg: Config with the sections `knockoffs`, `solver`, `path`, `cv`, `filter` and `parallel`.

        Returns:
            The settings.
        """
        return cls(
            q=cfg["filter"]["q"],
            k=cfg["filter"]["k"],
            variant=Variant(cfg["filter"]["variant"]),
            statistic=cfg["filter"]["statistic"],
            slack=cfg["knockoffs"]["slack"],
            shrinkage_ladder=tuple(cfg["knockoffs"]["shrinkage_ladder"]),
            min_eigenvalue=cfg["knockoffs"]["min_eigenvalue"],
            solver=SolverSettings.from_config(cfg["solver"]),
            grid_size=cfg["path"]["grid_size"],
            min_ratio=cfg["path"]["min_ratio"],
            cv_folds=cfg["cv"]["folds"],
            stratify=cfg["cv"]["stratify"],
            n_jobs=cfg["parallel"]["n_jobs"],
        )

    @property
    def label(self) -> str:
        """Method label of the knockoff procedure these settings describe."""
        statistic = "LSM" if self.statistic == "lsm" else "LCD_CV"
        return f"{'AFDR' if self.k > 1 else 'FDR'} {statistic}"


def fit_at_cv_penalty(
    x: np.ndarray, y: np.ndarray, settings: PipelineSettings, seed: int
) -> tuple[LassoFit, float]:
    """Calibrate the penalty by cross-validation and return the warm-started fit at the chosen penalty.

    Args:
        x: Standardized (possibly augmented) design matrix.
        y: Binary response.
        settings: Path, CV and solver settings.
        seed: Seed of the fold assignment.

    Returns:
        Tuple (fit at r_star, r_star).

    Raises:
        ComputationError: If the path does not reach r_star.
    """
    grid = make_grid(lambda_max(x, y), settings.grid_size, settings.min_ratio)
    folds = make_folds(len(y), settings.cv_folds, y if settings.stratify else None, seed=seed)
    r_star, _ = cross_validate_lambda(x, y, folds, grid, settings.solver, n_jobs=settings.n_jobs)
    index = int(np.flatnonzero(grid == r_star)[0])
    path = fit_path_on_grid(x, y, grid[: index + 1], settings.solver)
    if path.truncated:
        raise ComputationError(
            f"the solver failed before reaching the CV penalty r={r_star:.6g}", "knockoff_filter", "fit_at_cv_penalty"
        )
    return path.fits[-1], r_star


def knockoff_statistics(d: Dataset, x_tilde: np.ndarray, settings: PipelineSettings, seed: int) -> WStatistics:
    """Fit the augmented model [X, X~] and compute the configured statistic.

    An LSM path that stops early is used up to its last fit and flagged as truncated.

    Args:
        d: Standardized dataset.
        x_tilde: Knockoff matrix.
        settings: Pipeline settings.
        seed: Seed of the CV folds (used by 'lcd-cv' only).

    Returns:
        The statistics.
    """
    augmented = np.hstack([d.x, x_tilde])
    if settings.statistic == "lsm":
        path = fit_path(augmented, d.y, settings.grid_size, settings.min_ratio, settings.solver)
        if path.truncated:
            logger.warning(
                "Entry levels taken from the first %d of %d grid points; later entries count as never entered",
                len(path.fits),
                settings.grid_size,
            )
        return lsm_statistics(path)
    fit, _ = fit_at_cv_penalty(augmented, d.y, settings, seed)
    return lcd_statistics(fit)


def _knockoff_run(d: Dataset, model: KnockoffModel, seed: int, q: float, settings: PipelineSettings) -> SelectionResult:
    knockoff_seed, fold_seed = spawn_seeds(seed, 2)
    copy = sample_knockoffs(d, model, knockoff_seed)
    w = knockoff_statistics(d, copy.x_tilde, settings, fold_seed)
    result = threshold(w, q, settings.variant)
    run = dataclasses.replace(result.runs[0], seed=seed)
    return dataclasses.replace(result, runs=(run,))


def knockoff_select(d: Dataset, settings: PipelineSettings, seed: int) -> SelectionResult:
    """Run the (aggregated) knockoff filter on a standardized dataset.

    One knockoff model is estimated; each of the k runs draws its own knockoff copy, computes the statistic and
    applies the threshold at level q/k. The result is the union of the run selections.

    Args:
        d: Standardized dataset.
        settings: Pipeline settings.
        seed: Seed from which the per-run seeds are derived.

    Returns:
        The selection.
    """
    d.require_standardized("knockoff_select")
    model = fit_knockoff_model(d, settings.slack, settings.shrinkage_ladder, settings.min_eigenvalue)
    q_run = settings.q / settings.k
    run_seeds = spawn_seeds(seed, settings.k)
    runs = Parallel(n_jobs=settings.n_jobs if settings.k > 1 else 1)(
        delayed(_knockoff_run)(d, model, run_seed, q_run, settings) for run_seed in run_seeds
    )
    result = aggregate_afdr(runs, q=settings.q)
    logger.info("%s selected %d of %d variables", settings.label, result.size, d.p)
    return dataclasses.replace(result, method=settings.label)


def lasso_cv_select(d: Dataset, settings: PipelineSettings, seed: int) -> SelectionResult:
    """Select the nonzero coefficients of the penalized fit on X at the cross-validated penalty.

    Args:
        d: Standardized dataset.
        settings: Pipeline settings (path, CV and solver parts).
        seed: Seed of the fold assignment.

    Returns:
        The selection, without FDR control.
    """
    d.require_standardized("lasso_cv_select")
    fit, r_star = fit_at_cv_penalty(d.x, d.y, settings, spawn_seeds(seed, 1)[0])
    logger.debug("LASSO selected %d variables at r=%.6g", len(fit.support), r_star)
    return _baseline(fit.support, d.p, "LASSO")


def _baseline(selected: Sequence[int], p: int, label: str) -> SelectionResult:
    return SelectionResult(
        selected=tuple(int(j) for j in selected),
        threshold=None,
        q=None,
        variant=None,
        runs=(),
        p=p,
        method=label,
    )


@dataclasses.dataclass(frozen=True)
class Selector:
    """A named selection procedure, callable as `selector(dataset, seed)`.

    Attributes:
        method: Method name, one of `METHODS`.
        settings: Settings of the knockoff procedures (adjusted to the method's statistic and k).
    """

    method: str
    settings: PipelineSettings

    @property
    def label(self) -> str:
        """Human-readable method label."""
        return METHODS[self.method][0]

    def __call__(self, d: Dataset, seed: int) -> SelectionResult:
        """Run the procedure on a standardized dataset.

        Args:
            d: Standardized dataset.
            seed: Seed of all randomness in the procedure.

        Returns:
            The selection.
        """
        if self.method == "lasso-cv":
            return lasso_cv_select(d, self.settings, seed)
        if self.method == "full":
            return _baseline(range(d.p), d.p, self.label)
        if self.method == "empty":
            return _baseline((), d.p, self.label)
        return knockoff_select(d, self.settings, seed)


def make_selector(method: str, settings: PipelineSettings) -> Selector:
    """Create a selection procedure by name.

    FDR methods use a single knockoff run; AFDR methods use the configured k, which must be at least 2.

    Args:
        method: One of 'lasso-cv', 'fdr-lsm', 'afdr-lsm', 'fdr-lcd-cv', 'afdr-lcd-cv', 'full', 'empty'.
        settings: Base settings.

    Returns:
        The selector.

    Raises:
        InputError: If the method is unknown, or an AFDR method is requested with k < 2.
    """
    if method not in METHODS:
        raise InputError(
            f"unknown method {method!r}, expected one of {', '.join(METHODS)}", "knockoff_filter", "make_selector"
        )
    _, statistic, aggregated = METHODS[method]
    if statistic is not None:
        if aggregated and settings.k < 2:
            raise InputError(f"method {method!r} needs k >= 2, got k={settings.k}", "knockoff_filter", "make_selector")
        settings = dataclasses.replace(settings, statistic=statistic, k=settings.k if aggregated else 1)
    return Selector(method=method, settings=settings)
