"""Deterministic, optionally stratified, cross-validation folds."""

from __future__ import annotations

import dataclasses
from collections.abc import Iterator

import numpy as np

from knockpipe.core.misc import InputError


@dataclasses.dataclass(frozen=True, eq=False)
class FoldAssignment:
    """Assignment of n observations to K folds, numbered 1..K.

    Attributes:
        fold_of: Fold number of every observation.
        k: Number of folds.
    """

    fold_of: np.ndarray
    k: int

    def __post_init__(self) -> None:
        """Freeze the assignment array."""
        fold_of = np.array(self.fold_of, dtype=int, copy=True)
        fold_of.setflags(write=False)
        object.__setattr__(self, "fold_of", fold_of)

    @property
    def n(self) -> int:
        """Number of observations."""
        return len(self.fold_of)

    def sizes(self) -> np.ndarray:
        """Return the number of observations in each fold."""
        return np.bincount(self.fold_of, minlength=self.k + 1)[1:]

    def validation_indices(self, fold: int) -> np.ndarray:
        """Return the observations held out in a fold (1-based fold number)."""
        return np.flatnonzero(self.fold_of == fold)

    def training_indices(self, fold: int) -> np.ndarray:
        """Return the observations used for training when a fold is held out (1-based fold number)."""
        return np.flatnonzero(self.fold_of != fold)

    def splits(self) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        """Yield (training, validation) index arrays for folds 1..K in order."""
        for fold in range(1, self.k + 1):
            yield self.training_indices(fold), self.validation_indices(fold)


def make_folds(n: int, k: int, stratify_by: np.ndarray | None = None, seed: int = 0) -> FoldAssignment:
    """Split n observations into k folds whose sizes differ by at most one.

    The observations are shuffled with a seeded generator and dealt to the folds round-robin. When stratifying,
    the shuffled positives are dealt first and the negatives continue the same rotation, so every fold receives
    the proportional share of positives up to one.

    Args:
        n: Number of observations.
        k: Number of folds, 2 <= k <= n.
        stratify_by: Optional binary vector of length n.
        seed: Seed for the shuffle.

    Returns:
        The fold assignment.

    Raises:
        InputError: If k is out of range or `stratify_by` does not match n.
    """
    if k < 2:
        raise InputError(f"the number of folds must be at least 2, got {k}", "data_model", "make_folds")
    if k > n:
        raise InputError(f"cannot split {n} observations into {k} folds", "data_model", "make_folds")
    rng = np.random.default_rng(seed)
    if stratify_by is None:
        order = rng.permutation(n)
    else:
        labels = np.asarray(stratify_by)
        if labels.shape != (n,):
            raise InputError(f"stratification vector must have length {n}", "data_model", "make_folds")
        positives = np.flatnonzero(labels == 1)
        negatives = np.flatnonzero(labels != 1)
        order = np.concatenate([rng.permutation(positives), rng.permutation(negatives)])
    fold_of = np.empty(n, dtype=int)
    fold_of[order] = np.arange(n) % k + 1
    return FoldAssignment(fold_of=fold_of, k=k)
