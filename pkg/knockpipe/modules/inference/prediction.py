"""K-fold cross-validated prediction error of a selection procedure followed by a logistic refit."""

from __future__ import annotations

import dataclasses
from collections.abc import Callable

import numpy as np
from joblib import Parallel, delayed

from knockpipe.core.misc import ComputationError, KnockpipeErrorMessage, get_logger, spawn_seeds
from knockpipe.modules.data_model import Dataset, FoldAssignment, standardize
from knockpipe.modules.inference.refit import refit_logistic

logger = get_logger(__name__)

# A selector maps (standardized dataset, seed) to a result with a `selected` tuple of 0-based indices
SelectorFunction = Callable[[Dataset, int], object]


@dataclasses.dataclass(frozen=True, eq=False)
class PredictionReport:
    """Cross-validated prediction error of one method.

    Attributes:
        model_size: Number of variables the method selects on the full data.
        pred_error: Mean over the successful folds of the per-observation validation negative log-likelihood.
        folds: The fold assignment.
        method_label: Label of the method.
        fold_errors: Validation loss per fold (nan for failed folds).
        failed_folds: 1-based numbers of the folds that failed, with their error messages.
        support: 0-based indices selected on the full data.
    """

    model_size: int
    pred_error: float
    folds: FoldAssignment
    method_label: str
    fold_errors: np.ndarray
    failed_folds: tuple[tuple[int, str], ...] = ()
    support: tuple[int, ...] = ()

    def to_dict(self, column_names: list[str] | tuple[str, ...] | None = None) -> dict:
        """Return the report as a JSON-compatible structure with 1-based column numbers."""
        result = {
            "method": self.method_label,
            "model_size": self.model_size,
            "pred_error": self.pred_error,
            "folds": self.folds.k,
            "fold_errors": self.fold_errors,
            "failed_folds": [{"fold": fold, "error": message} for fold, message in self.failed_folds],
            "support": [j + 1 for j in self.support],
        }
        if column_names is not None:
            result["support_names"] = [column_names[j] for j in self.support]
        return result


def _standardized(d: Dataset) -> Dataset:
    return d if d.standardized else standardize(d)


def _fold_error(
    d: Dataset,
    train: np.ndarray,
    valid: np.ndarray,
    selector: SelectorFunction,
    seed: int,
    irls_tol: float,
    irls_max_iter: int,
) -> float:
    """Select and refit on the training rows, then return the mean validation negative log-likelihood."""
    training = standardize(d.take(train))
    support = selector(training, seed).selected
    fit = refit_logistic(training, support, tol=irls_tol, max_iter=irls_max_iter)
    x_valid = training.transform(d.raw_x()[valid])[:, list(fit.support)]
    eta = fit.intercept + x_valid @ fit.beta
    y_valid = d.y[valid]
    return float(np.mean(np.logaddexp(0.0, eta) - y_valid * eta))


def _safe_fold_error(*args: object) -> tuple[float, str | None]:
    try:
        return _fold_error(*args), None
    except KnockpipeErrorMessage as e:
        return np.nan, e.one_line()


def cv_prediction_error(
    d: Dataset,
    selector: SelectorFunction,
    folds: FoldAssignment,
    seed: int = 0,
    label: str | None = None,
    irls_tol: float = 1e-10,
    irls_max_iter: int = 100,
    n_jobs: int = 1,
) -> PredictionReport:
    """Estimate the prediction error of selection followed by a logistic refit.

    In every fold the training rows are standardized on their own, the selector is run on them, the logistic
    model is refitted on the selected columns and the validation rows (transformed with the training means and
    scales) are scored. Folds that fail are excluded with a warning.

    Args:
        d: The dataset (raw or standardized).
        selector: Selection procedure.
        folds: Fold assignment over the rows of `d`.
        seed: Seed from which the selector seeds are derived.
        label: Method label; defaults to the selector's `label` attribute.
        irls_tol: Convergence tolerance of the logistic refit.
        irls_max_iter: Maximum number of IRLS iterations.
        n_jobs: Number of folds evaluated in parallel.

    Returns:
        The report.

    Raises:
        ComputationError: If every fold fails.
    """
    label = label or getattr(selector, "label", "")
    seeds = spawn_seeds(seed, folds.k + 1)
    full = selector(_standardized(d), seeds[0])

    results = Parallel(n_jobs=n_jobs)(
        delayed(_safe_fold_error)(d, train, valid, selector, fold_seed, irls_tol, irls_max_iter)
        for (train, valid), fold_seed in zip(folds.splits(), seeds[1:], strict=True)
    )
    fold_errors = np.array([error for error, _ in results])
    failed = tuple((fold, message) for fold, (_, message) in enumerate(results, start=1) if message is not None)
    for fold, message in failed:
        logger.warning("%s: fold %d excluded from the prediction error: %s", label, fold, message)
    if len(failed) == folds.k:
        raise ComputationError(f"all {folds.k} folds failed for {label}", "inference", "cv_prediction_error")

    report = PredictionReport(
        model_size=len(full.selected),
        pred_error=float(np.nanmean(fold_errors)),
        folds=folds,
        method_label=label,
        fold_errors=fold_errors,
        failed_folds=failed,
        support=tuple(full.selected),
    )
    logger.info("%s: model size %d, prediction error %.4f", label, report.model_size, report.pred_error)
    return report
