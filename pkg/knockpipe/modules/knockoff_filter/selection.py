"""Knockoff thresholds and aggregation of several knockoff runs."""

from __future__ import annotations

import dataclasses
import math
from collections.abc import Sequence
from enum import Enum

import numpy as np

from knockpipe.core.misc import InputError
from knockpipe.modules.knockoff_filter.statistics import StatisticKind, WStatistics


class Variant(Enum):
    """Threshold variants."""

    knockoff = "knockoff"
    knockoff_plus = "knockoff_plus"

    @property
    def offset(self) -> int:
        """Constant added to the estimated number of false discoveries."""
        return 1 if self is Variant.knockoff_plus else 0


@dataclasses.dataclass(frozen=True, eq=False)
class RunRecord:
    """Provenance of one knockoff run.

    Attributes:
        q: Target level of the run.
        threshold: Threshold of the run (inf when no threshold was feasible).
        selected: Selected 0-based indices.
        seed: Seed of the knockoff draw, if any.
        w: The statistics the run was thresholded on.
    """

    q: float
    threshold: float
    selected: tuple[int, ...]
    seed: int | None = None
    w: WStatistics | None = None


@dataclasses.dataclass(frozen=True, eq=False)
class SelectionResult:
    """Selected variables with their provenance.

    Attributes:
        selected: Sorted 0-based indices of the selected variables.
        threshold: Threshold on w for single runs, +inf if infeasible, None for aggregated and baseline results.
        q: Target (aggregated) level, None for selectors without FDR control.
        variant: Threshold variant, None for selectors without FDR control.
        runs: One record per knockoff run.
        p: Number of candidate variables.
        kind: Statistic the runs were computed with.
        method: Label of the procedure that produced the result.
    """

    selected: tuple[int, ...]
    threshold: float | None
    q: float | None
    variant: Variant | None
    runs: tuple[RunRecord, ...]
    p: int
    kind: StatisticKind | None = None
    method: str = ""

    @property
    def k(self) -> int:
        """Number of aggregated knockoff runs."""
        return len(self.runs)

    @property
    def size(self) -> int:
        """Number of selected variables."""
        return len(self.selected)


def threshold(w: WStatistics | np.ndarray, q: float, variant: Variant | str = Variant.knockoff_plus) -> SelectionResult:
    """Apply the knockoff or knockoff+ threshold.

    Candidates are the distinct nonzero |w_j|. The threshold is the smallest candidate t with
    (offset + #{w_j <= -t}) / max(#{w_j >= t}, 1) <= q, where offset is 1 for knockoff+ and 0 otherwise. The plain
    knockoff variant also needs #{w_j >= t} >= 1. If no candidate qualifies, the threshold is +inf and nothing is
    selected.

    Args:
        w: Statistics (or the bare w vector).
        q: Target level in [0, 1].
        variant: Threshold variant.

    Returns:
        Single-run selection {j : w_j >= T}.

    Raises:
        InputError: If q is out of range.
    """
    variant = Variant(variant)
    if not 0 <= q <= 1:
        raise InputError(f"q must be in [0, 1], got {q}", "knockoff_filter", "threshold")
    kind = w.kind if isinstance(w, WStatistics) else None
    values = np.asarray(w.w if isinstance(w, WStatistics) else w, dtype=float)

    candidates = np.unique(np.abs(values[values != 0]))
    sorted_w = np.sort(values)
    positives = len(values) - np.searchsorted(sorted_w, candidates, side="left")
    negatives = np.searchsorted(sorted_w, -candidates, side="right")
    ratio = (variant.offset + negatives) / np.maximum(positives, 1)
    feasible = ratio <= q
    if variant is Variant.knockoff:
        feasible &= positives > 0
    first = np.flatnonzero(feasible)
    t = float(candidates[first[0]]) if len(first) else math.inf

    selected = tuple(int(j) for j in np.flatnonzero(values >= t))
    run = RunRecord(q=float(q), threshold=t, selected=selected, w=w if isinstance(w, WStatistics) else None)
    return SelectionResult(
        selected=selected, threshold=t, q=float(q), variant=variant, runs=(run,), p=len(values), kind=kind
    )


def aggregate_afdr(runs: Sequence[SelectionResult], q: float | None = None) -> SelectionResult:
    """Aggregate knockoff runs by taking the union of their selections.

    Args:
        runs: One or more results sharing p and variant, with levels summing to q.
        q: Total level; defaults to the sum of the run levels.

    Returns:
        The single input result if there is only one run, otherwise the union with every run's provenance.

    Raises:
        InputError: If there are no runs, p or variant differ between runs, or the levels do not sum to q.
    """
    if not runs:
        raise InputError("at least one run is needed", "knockoff_filter", "aggregate_afdr")
    first = runs[0]
    for run in runs[1:]:
        if run.p != first.p:
            raise InputError(f"mismatched p across runs: {first.p} and {run.p}", "knockoff_filter", "aggregate_afdr")
        if run.variant != first.variant:
            raise InputError("mismatched variant across runs", "knockoff_filter", "aggregate_afdr")
    records = tuple(record for run in runs for record in run.runs)
    total = math.fsum(record.q for record in records)
    if q is not None and not math.isclose(total, q, rel_tol=1e-9, abs_tol=1e-12):
        raise InputError(f"run levels sum to {total}, expected {q}", "knockoff_filter", "aggregate_afdr")
    if len(runs) == 1:
        return first

    kinds = {run.kind for run in runs}
    return SelectionResult(
        selected=tuple(sorted(set().union(*(run.selected for run in runs)))),
        threshold=None,
        q=q if q is not None else total,
        variant=first.variant,
        runs=records,
        p=first.p,
        kind=kinds.pop() if len(kinds) == 1 else None,
        method=first.method,
    )
