"""Knockoff statistics, thresholds, aggregation and end-to-end selection procedures."""

from .pipeline import (
    METHODS,
    PipelineSettings,
    Selector,
    fit_at_cv_penalty,
    knockoff_select,
    knockoff_statistics,
    lasso_cv_select,
    make_selector,
)
from .report import render_selection, selection_to_dict
from .selection import RunRecord, SelectionResult, Variant, aggregate_afdr, threshold
from .statistics import StatisticKind, WStatistics, lcd_statistics, lsm_statistics
