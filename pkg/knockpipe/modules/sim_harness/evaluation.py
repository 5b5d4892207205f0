"""Support recovery metrics of a selection against the true support."""

from __future__ import annotations

import dataclasses
from collections.abc import Iterable


@dataclasses.dataclass(frozen=True)
class SelectionMetrics:
    """Counts and rates of one selection.

    Attributes:
        fdp: False discovery proportion fp / max(|selected|, 1).
        tp: True positives.
        fp: False positives.
        fn: False negatives.
        hd: Hamming distance fp + fn.
        power: tp / |true support|, 0 when the true support is empty.
        empty_truth: Whether the true support is empty, in which case `power` is a convention.
        size: Number of selected variables.
    """

    fdp: float
    tp: int
    fp: int
    fn: int
    hd: int
    power: float
    empty_truth: bool = False
    size: int = 0


def evaluate_selection(selected: Iterable[int], true_support: Iterable[int]) -> SelectionMetrics:
    """Compare a selected set with the true support.

    Args:
        selected: Selected indices.
        true_support: Indices of the truly nonzero coefficients.

    Returns:
        The metrics.
    """
    selected = set(selected)
    truth = set(true_support)
    tp = len(selected & truth)
    fp = len(selected - truth)
    fn = len(truth - selected)
    return SelectionMetrics(
        fdp=fp / max(len(selected), 1),
        tp=tp,
        fp=fp,
        fn=fn,
        hd=fp + fn,
        power=tp / len(truth) if truth else 0.0,
        empty_truth=not truth,
        size=len(selected),
    )
