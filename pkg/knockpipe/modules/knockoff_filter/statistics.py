"""Antisymmetric knockoff statistics."""

from __future__ import annotations

import dataclasses
from enum import Enum

import numpy as np

from knockpipe.core.misc import ComputationError, InputError
from knockpipe.modules.sparse_glm import LassoFit, LassoPath


class StatisticKind(Enum):
    """Kinds of knockoff statistics."""

    lsm = "lsm"
    lcd = "lcd"


@dataclasses.dataclass(frozen=True, eq=False)
class WStatistics:
    """Per-variable knockoff statistics.

    Attributes:
        w: Statistic per original variable; large positive values are evidence of a true signal.
        kind: How `w` was computed from `z` and `z_tilde`.
        z: Importance of each original variable.
        z_tilde: Importance of each knockoff variable.
        truncated: Whether the statistics come from a path that stopped before the end of its grid.
    """

    w: np.ndarray
    kind: StatisticKind
    z: np.ndarray
    z_tilde: np.ndarray
    truncated: bool = False

    @property
    def p(self) -> int:
        """Number of variables."""
        return len(self.w)

    def swapped(self) -> WStatistics:
        """Return the statistics with the original and knockoff variables exchanged (w is negated)."""
        return _combine(self.z_tilde, self.z, self.kind, self.truncated)


def _combine(z: np.ndarray, z_tilde: np.ndarray, kind: StatisticKind, truncated: bool = False) -> WStatistics:
    if kind is StatisticKind.lsm:
        w = np.maximum(z, z_tilde) * np.sign(z - z_tilde)
    else:
        w = z - z_tilde
    return WStatistics(w=w, kind=kind, z=z, z_tilde=z_tilde, truncated=truncated)


def _split(values: np.ndarray, function: str) -> tuple[np.ndarray, np.ndarray]:
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or len(values) == 0 or len(values) % 2:
        raise InputError(
            f"expected a fit over an augmented matrix with 2p columns, got {len(values)} columns",
            "knockoff_filter",
            function,
        )
    p = len(values) // 2
    return values[:p], values[p:]


def lsm_statistics(path: LassoPath) -> WStatistics:
    """Compute the signed-max statistic from the entry levels of a path over [X, X~].

    w_j = max(z_j, z~_j) * sign(z_j - z~_j), with z the penalty at which a variable first enters the path. On a
    truncated path, variables that have not entered by the last fitted penalty get z = 0.

    Args:
        path: Regularization path over the augmented matrix.

    Returns:
        The statistics.
    """
    z, z_tilde = _split(path.entry_level, "lsm_statistics")
    return _combine(z, z_tilde, StatisticKind.lsm, path.truncated)


def lcd_statistics(fit: LassoFit) -> WStatistics:
    """Compute the coefficient-difference statistic w_j = |beta_j| - |beta_{p+j}| of a fit over [X, X~].

    Args:
        fit: Converged fit over the augmented matrix.

    Returns:
        The statistics.

    Raises:
        ComputationError: If the fit did not converge.
    """
    if not fit.converged:
        raise ComputationError(
            f"cannot compute coefficient differences from a non-converged fit (r={fit.r:.6g})",
            "knockoff_filter",
            "lcd_statistics",
        )
    beta, beta_tilde = _split(fit.beta, "lcd_statistics")
    return _combine(np.abs(beta), np.abs(beta_tilde), StatisticKind.lcd)
