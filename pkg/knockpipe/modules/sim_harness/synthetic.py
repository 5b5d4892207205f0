"""Synthetic sparse logistic data with a known support."""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from knockpipe.core.misc import ComputationError, get_logger
from knockpipe.modules.data_model import Dataset, standardize
from knockpipe.modules.sim_harness.scenario import Scenario

logger = get_logger(__name__)


def replicate_rng(sc: Scenario, replicate: int) -> np.random.Generator:
    """Return the generator of one replicate, keyed by (base_seed, replicate)."""
    return np.random.default_rng(np.random.SeedSequence([sc.base_seed, replicate]))


def _draw_response(rng: np.random.Generator, eta: np.ndarray) -> np.ndarray:
    return (rng.random(len(eta)) < expit(eta)).astype(np.int8)


def generate_synthetic(sc: Scenario, replicate: int) -> tuple[Dataset, tuple[int, ...], np.ndarray]:
    """Draw one replicate of the scenario.

    Rows of X are i.i.d. N(0, Sigma), then standardized. The true coefficient vector has `s0` nonzero entries at
    uniformly drawn positions, each +amplitude or -amplitude with equal probability, and the response follows
    the logistic model on the standardized columns. A response with a single class is redrawn once.

    Args:
        sc: The scenario.
        replicate: Replicate index.

    Returns:
        Tuple (standardized dataset, sorted 0-based true support, true coefficient vector).

    Raises:
        ComputationError: If the redrawn response still has a single class.
    """
    rng = replicate_rng(sc, replicate)
    factor = np.linalg.cholesky(sc.covariance())
    z = rng.standard_normal((sc.n, sc.p))
    names = tuple(f"X{j + 1}" for j in range(sc.p))
    d = standardize(Dataset(z @ factor.T, np.zeros(sc.n, dtype=np.int8), names))

    support = np.sort(rng.choice(sc.p, size=sc.s0, replace=False))
    beta_star = np.zeros(sc.p)
    beta_star[support] = sc.amplitude * rng.choice([-1.0, 1.0], size=sc.s0)

    eta = d.x @ beta_star
    y = _draw_response(rng, eta)
    if y.min() == y.max():
        logger.warning("Replicate %d drew a single-class response, drawing it again", replicate)
        y = _draw_response(rng, eta)
        if y.min() == y.max():
            raise ComputationError(
                f"replicate {replicate}: the response has a single class after one redraw",
                "sim_harness",
                "generate_synthetic",
            )
    d = Dataset(d.x, y, d.column_names, True, d.column_means, d.column_scales)
    return d, tuple(int(j) for j in support), beta_star
