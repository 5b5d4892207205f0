"""Inference and prediction-performance tables as CSV data frames and aligned text."""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence

import numpy as np
import pandas as pd
from rich.table import Table
from scipy import stats

from knockpipe.core.console import plain_console
from knockpipe.core.misc import get_logger
from knockpipe.modules.data_model import Dataset
from knockpipe.modules.inference.prediction import PredictionReport
from knockpipe.modules.inference.refit import (
    INTERCEPT,
    RefitEstimates,
    Scale,
    refit_logistic,
    refit_ols,
    significance_stars,
)

logger = get_logger(__name__)

OLS_ALL = "OLS (standardized)"
OLS_CONTINUOUS = "OLS (continuous standardized)"
LOGISTIC = "Logistic"
AME = "AME"

# Largest tolerated fraction of support coefficients that the refit shrinks below the penalized fit
SHRINKAGE_TOLERANCE = 0.1


def check_refit_shrinkage(
    refit: RefitEstimates, penalized: np.ndarray, tolerance: float = SHRINKAGE_TOLERANCE
) -> float:
    """Compare the magnitudes of refit coefficients with those of a penalized fit on the same scale.

    A warning is logged when more than `tolerance` of the support coefficients are smaller in magnitude after the
    unpenalized refit than in the penalized fit.

    Args:
        refit: Logistic refit on the standardized scale.
        penalized: Penalized coefficients of all p columns.
        tolerance: Largest tolerated fraction of shrunk coefficients.

    Returns:
        The fraction of shrunk coefficients (0 for an empty support).
    """
    if not refit.support:
        return 0.0
    shrunk = np.abs(refit.coef[1:]) < np.abs(np.asarray(penalized)[list(refit.support)])
    fraction = float(np.mean(shrunk))
    if fraction > tolerance:
        names = [label for label, flag in zip(refit.labels[1:], shrunk, strict=True) if flag]
        logger.warning(
            "Refit coefficients are smaller than the penalized ones for %d of %d variables (%s)",
            int(shrunk.sum()),
            len(shrunk),
            ", ".join(names),
        )
    return fraction


def run_refits(
    d: Dataset,
    support: Iterable[int],
    irls_tol: float = 1e-10,
    irls_max_iter: int = 100,
    penalized: np.ndarray | None = None,
) -> dict[str, RefitEstimates]:
    """Run the least-squares refits on both scales and the logistic refit on a support.

    Args:
        d: Standardized dataset.
        support: 0-based column indices.
        irls_tol: Convergence tolerance of the logistic refit.
        irls_max_iter: Maximum number of IRLS iterations.
        penalized: Coefficients of a penalized logistic fit on all columns; if given, the logistic refit is
            checked for shrinkage against them.

    Returns:
        Refits keyed by table column header. The logistic refit also carries the marginal effects.
    """
    support = tuple(support)
    refits = {
        OLS_ALL: refit_ols(d, support, Scale.standardized_all),
        OLS_CONTINUOUS: refit_ols(d, support, Scale.standardized_continuous_only),
        LOGISTIC: refit_logistic(d, support, Scale.standardized_all, tol=irls_tol, max_iter=irls_max_iter),
    }
    if penalized is not None:
        check_refit_shrinkage(refits[LOGISTIC], penalized)
    return refits


def _columns(refits: Mapping[str, RefitEstimates]) -> list[tuple[str, list[tuple[str, float, float, float]]]]:
    """Return (header, [(label, estimate, se, p_value)]) per table column, with the AME column last."""
    columns = []
    for header, fit in refits.items():
        columns.append((header, list(zip(fit.labels, fit.coef, fit.se, fit.p_values, strict=True))))
    logistic = refits.get(LOGISTIC)
    if logistic is not None and logistic.marginal_effects is not None:
        ame = logistic.marginal_effects
        with np.errstate(divide="ignore", invalid="ignore"):
            p_values = 2 * stats.norm.sf(np.abs(ame / logistic.marginal_effects_se))
        rows = list(zip(logistic.labels[1:], ame, logistic.marginal_effects_se, p_values, strict=True))
        columns.append((AME, rows))
    return columns


def inference_frame(refits: Mapping[str, RefitEstimates]) -> pd.DataFrame:
    """Return the refit estimates in long format, one row per (variable, model).

    Args:
        refits: Refits keyed by column header, as returned by `run_refits`.

    Returns:
        Data frame with the columns variable, model, estimate, se, p_value and stars.
    """
    records = [
        {"variable": label, "model": header, "estimate": est, "se": se, "p_value": p, "stars": significance_stars(p)}
        for header, rows in _columns(refits)
        for label, est, se, p in rows
    ]
    return pd.DataFrame.from_records(records, columns=["variable", "model", "estimate", "se", "p_value", "stars"])


def render_inference(refits: Mapping[str, RefitEstimates]) -> str:
    """Render the refits side by side: estimate with stars, standard error in parentheses beneath.

    Args:
        refits: Refits keyed by column header.

    Returns:
        The text.
    """
    columns = _columns(refits)
    labels = [INTERCEPT]
    for _, rows in columns:
        labels.extend(label for label, *_ in rows if label not in labels)
    table = Table(box=None, show_edge=False, pad_edge=False)
    table.add_column("Variable")
    for header, _ in columns:
        table.add_column(header, justify="right")
    lookup = [{label: (est, se, p) for label, est, se, p in rows} for _, rows in columns]
    for label in labels:
        estimates, errors = [], []
        for column in lookup:
            if label in column:
                est, se, p = column[label]
                estimates.append(f"{est:.4f}{significance_stars(p)}")
                errors.append(f"({se:.4f})" if np.isfinite(se) else "(-)")
            else:
                estimates.append("")
                errors.append("")
        table.add_row(label, *estimates)
        table.add_row("", *errors)
    console = plain_console()
    console.print(table)
    console.print()
    console.print("Significance: *** p < 0.01, ** p < 0.05, * p < 0.1 (two-sided)")
    return console.file.getvalue()


def prediction_rows(reports: Sequence[PredictionReport]) -> list[dict]:
    """Return the three table columns of each report."""
    return [
        {"method": report.method_label, "model_size": report.model_size, "pred_error": report.pred_error}
        for report in reports
    ]


def prediction_frame(rows: Sequence[Mapping]) -> pd.DataFrame:
    """Return the prediction-performance table as a data frame (method, model_size, pred_error)."""
    return pd.DataFrame.from_records(
        [{key: row[key] for key in ("method", "model_size", "pred_error")} for row in rows],
        columns=["method", "model_size", "pred_error"],
    )


def render_prediction(rows: Sequence[Mapping]) -> str:
    """Render the prediction-performance table: Method | Model size | Pred. error.

    Args:
        rows: Mappings with the keys method, model_size and pred_error.

    Returns:
        The text.
    """
    table = Table(box=None, show_edge=False, pad_edge=False)
    table.add_column("Method")
    table.add_column("Model size", justify="right")
    table.add_column("Pred. error", justify="right")
    for row in rows:
        error = row["pred_error"]
        error = float(error) if error is not None else float("nan")
        table.add_row(str(row["method"]), str(row["model_size"]), f"{error:.4f}" if np.isfinite(error) else "--")
    console = plain_console()
    console.print(table)
    return console.file.getvalue()
