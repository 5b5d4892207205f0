"""Estimate the covariance of X and sample Gaussian model-X knockoff copies.

Given a positive definite correlation matrix Sigma and a vector s, the knockoff copy of a row x is drawn from
N(mu, V) with

    mu = x - x Sigma^-1 diag(s)
    V  = 2 diag(s) - diag(s) Sigma^-1 diag(s)

so that [X, X~] has covariance G = [[Sigma, Sigma - diag(s)], [Sigma - diag(s), Sigma]].
"""

from __future__ import annotations

import dataclasses
from collections.abc import Sequence

import numpy as np
import scipy.linalg

from knockpipe.core.misc import InputError, NotPositiveDefiniteError, get_logger
from knockpipe.modules.data_model import Dataset

logger = get_logger(__name__)

DEFAULT_SHRINKAGE_LADDER = (0.0, 1e-4, 1e-3, 1e-2, 1e-1)
DEFAULT_MIN_EIGENVALUE = 1e-6
DEFAULT_SLACK = 0.999


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float, copy=True)
    array.setflags(write=False)
    return array


def _symmetrize(matrix: np.ndarray) -> np.ndarray:
    return (matrix + matrix.T) / 2


def _min_eigenvalue(matrix: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(matrix)[0])


def _inverse_pd(matrix: np.ndarray, function: str) -> np.ndarray:
    try:
        factor = scipy.linalg.cho_factor(matrix, lower=True)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError(
            "the covariance matrix is not positive definite", "gaussian_knockoffs", function
        ) from None
    return _symmetrize(scipy.linalg.cho_solve(factor, np.eye(len(matrix))))


@dataclasses.dataclass(frozen=True, eq=False)
class KnockoffModel:
    """Parameters of the Gaussian knockoff distribution.

    Attributes:
        sigma: Estimated correlation-scale covariance of X (unit diagonal).
        sigma_inv: Inverse of `sigma`.
        s: The s-vector, all entries positive.
        v: Conditional covariance of a knockoff row given the original row.
        shrinkage: Shrinkage toward the identity applied to the empirical covariance.
        slack: Factor applied to the equicorrelated s-vector.
        v_factor: Lower-triangular Cholesky factor of `v`.
    """

    sigma: np.ndarray
    sigma_inv: np.ndarray
    s: np.ndarray
    v: np.ndarray
    shrinkage: float
    slack: float
    v_factor: np.ndarray

    def __post_init__(self) -> None:
        """Freeze the arrays."""
        for field in ("sigma", "sigma_inv", "s", "v", "v_factor"):
            object.__setattr__(self, field, _frozen(getattr(self, field)))

    @classmethod
    def from_covariance(cls, sigma: np.ndarray, slack: float = DEFAULT_SLACK, shrinkage: float = 0.0) -> KnockoffModel:
        """Build a knockoff model from a known positive definite correlation matrix.

        Args:
            sigma: Correlation matrix of X.
            slack: Factor applied to the equicorrelated s-vector.
            shrinkage: Shrinkage level already applied to `sigma`, recorded for provenance.

        Returns:
            The knockoff model.

        Raises:
            NotPositiveDefiniteError: If sigma or the resulting V is not positive definite.
            InputError: If sigma is not a symmetric matrix.
        """
        sigma = np.asarray(sigma, dtype=float)
        if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
            raise InputError("sigma must be a square matrix", "gaussian_knockoffs", "from_covariance")
        if not np.allclose(sigma, sigma.T, rtol=0, atol=1e-12):
            raise InputError("sigma must be symmetric", "gaussian_knockoffs", "from_covariance")
        sigma = _symmetrize(sigma)
        s = compute_s_equicorrelated(sigma, slack)
        sigma_inv = _inverse_pd(sigma, "from_covariance")
        identity_error = float(np.max(np.abs(sigma_inv @ sigma - np.eye(len(sigma)))))
        if identity_error > 1e-8:
            logger.warning("Covariance inverse is inaccurate (max |sigma_inv sigma - I| = %.3g)", identity_error)
        v = _conditional_covariance(sigma_inv, s, "from_covariance")
        try:
            v_factor = scipy.linalg.cholesky(v, lower=True)
        except np.linalg.LinAlgError:
            raise NotPositiveDefiniteError(
                "could not factorize the knockoff covariance V", "gaussian_knockoffs", "from_covariance"
            ) from None
        return cls(
            sigma=sigma,
            sigma_inv=sigma_inv,
            s=s,
            v=v,
            shrinkage=float(shrinkage),
            slack=float(slack),
            v_factor=v_factor,
        )

    @property
    def p(self) -> int:
        """Number of variables."""
        return len(self.s)

    @property
    def v_min_eigenvalue(self) -> float:
        """Smallest eigenvalue of V."""
        return _min_eigenvalue(self.v)

    @property
    def sigma_min_eigenvalue(self) -> float:
        """Smallest eigenvalue of sigma."""
        return _min_eigenvalue(self.sigma)

    def joint_covariance(self) -> np.ndarray:
        """Return the 2p x 2p covariance G of the augmented matrix [X, X~]."""
        off = self.sigma - np.diag(self.s)
        return np.block([[self.sigma, off], [off, self.sigma]])

    def conditional_mean(self, x: np.ndarray) -> np.ndarray:
        """Return the conditional mean mu = X - X Sigma^-1 diag(s) of the knockoff rows."""
        return x - (x @ self.sigma_inv) * self.s

    def summary(self) -> dict:
        """Return the model parameters reported by the CLI."""
        return {
            "p": self.p,
            "s": self.s,
            "slack": self.slack,
            "shrinkage": self.shrinkage,
            "sigma_min_eigenvalue": self.sigma_min_eigenvalue,
            "v_min_eigenvalue": self.v_min_eigenvalue,
        }


@dataclasses.dataclass(frozen=True, eq=False)
class KnockoffCopy:
    """A sampled knockoff matrix.

    Attributes:
        x_tilde: Knockoff matrix with the same shape as the parent design matrix.
        seed: Seed used for sampling.
        parent_hash: Checksum of the dataset the copy was generated from.
    """

    x_tilde: np.ndarray
    seed: int
    parent_hash: str

    def __post_init__(self) -> None:
        """Freeze the knockoff matrix."""
        object.__setattr__(self, "x_tilde", _frozen(self.x_tilde))

    def augmented(self, d: Dataset) -> np.ndarray:
        """Return the augmented design matrix [X, X~].

        Args:
            d: The parent dataset.

        Returns:
            Matrix with 2p columns.

        Raises:
            InputError: If `d` is not the dataset the copy was generated from.
        """
        if d.checksum != self.parent_hash:
            raise InputError("knockoff copy belongs to a different dataset", "gaussian_knockoffs", "augmented")
        return np.hstack([d.x, self.x_tilde])


def shrink_to_positive_definite(
    sigma_hat: np.ndarray,
    ladder: Sequence[float] = DEFAULT_SHRINKAGE_LADDER,
    min_eigenvalue: float = DEFAULT_MIN_EIGENVALUE,
) -> tuple[np.ndarray, float]:
    """Shrink a correlation matrix toward the identity by the smallest sufficient level on a ladder.

    Args:
        sigma_hat: Symmetric positive semi-definite matrix.
        ladder: Increasing shrinkage levels gamma to try.
        min_eigenvalue: Required smallest eigenvalue of (1 - gamma) sigma_hat + gamma I.

    Returns:
        The shrunk matrix rescaled to unit diagonal, and the chosen gamma.

    Raises:
        NotPositiveDefiniteError: If no level on the ladder is sufficient.
    """
    identity = np.eye(len(sigma_hat))
    sigma_hat = _symmetrize(np.asarray(sigma_hat, dtype=float))
    for gamma in sorted(ladder):
        shrunk = (1 - gamma) * sigma_hat + gamma * identity
        if _min_eigenvalue(shrunk) >= min_eigenvalue:
            if gamma > 0:
                logger.info("Covariance shrunk toward the identity with gamma = %g", gamma)
            scale = 1 / np.sqrt(np.diag(shrunk))
            return _symmetrize(shrunk * np.outer(scale, scale)), float(gamma)
    raise NotPositiveDefiniteError(
        f"no shrinkage level in {list(ladder)} makes the covariance positive definite",
        "gaussian_knockoffs",
        "estimate_covariance",
    )


def estimate_covariance(
    d: Dataset,
    ladder: Sequence[float] = DEFAULT_SHRINKAGE_LADDER,
    min_eigenvalue: float = DEFAULT_MIN_EIGENVALUE,
) -> np.ndarray:
    """Estimate the correlation-scale covariance X^T X / n of a standardized dataset.

    Args:
        d: A standardized dataset.
        ladder: Shrinkage levels, see `shrink_to_positive_definite`.
        min_eigenvalue: Required smallest eigenvalue.

    Returns:
        Positive definite p x p matrix with unit diagonal.
    """
    d.require_standardized("estimate_covariance")
    return shrink_to_positive_definite(d.x.T @ d.x / d.n, ladder, min_eigenvalue)[0]


def compute_s_equicorrelated(sigma: np.ndarray, slack: float = DEFAULT_SLACK) -> np.ndarray:
    """Return the equicorrelated s-vector, s_j = slack * min(2 lambda_min(sigma), 1).

    Args:
        sigma: Symmetric positive definite matrix with unit diagonal.
        slack: Factor in (0, 1]; values below 1 keep V strictly positive definite.

    Returns:
        Vector of length p.

    Raises:
        InputError: If slack is out of range.
        NotPositiveDefiniteError: If sigma is not positive definite.
    """
    if not 0 < slack <= 1:
        raise InputError(f"slack must be in (0, 1], got {slack}", "gaussian_knockoffs", "compute_s_equicorrelated")
    lambda_min = _min_eigenvalue(np.asarray(sigma, dtype=float))
    if lambda_min <= 0:
        raise NotPositiveDefiniteError(
            f"sigma is not positive definite (smallest eigenvalue {lambda_min:.3g})",
            "gaussian_knockoffs",
            "compute_s_equicorrelated",
        )
    return np.full(len(sigma), slack * min(2 * lambda_min, 1.0))


def _conditional_covariance(sigma_inv: np.ndarray, s: np.ndarray, function: str) -> np.ndarray:
    v = _symmetrize(2 * np.diag(s) - s[:, None] * sigma_inv * s[None, :])
    lambda_min = _min_eigenvalue(v)
    if lambda_min <= 0:
        raise NotPositiveDefiniteError(
            f"V is not positive definite (smallest eigenvalue {lambda_min:.3g}); s is too large for this covariance",
            "gaussian_knockoffs",
            function,
        )
    return v


def knockoff_parameters(d: Dataset, sigma: np.ndarray, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return the conditional mean rows mu and the conditional covariance V of the knockoff distribution.

    Args:
        d: The dataset.
        sigma: Positive definite p x p matrix.
        s: Vector of length p with positive entries.

    Returns:
        Tuple (mu, v) with mu of shape n x p and v of shape p x p.

    Raises:
        InputError: If the shapes disagree or s has non-positive entries.
    """
    sigma = np.asarray(sigma, dtype=float)
    s = np.asarray(s, dtype=float)
    if sigma.shape != (d.p, d.p) or s.shape != (d.p,):
        raise InputError(
            f"shape mismatch: dataset has {d.p} columns, sigma {sigma.shape}, s {s.shape}",
            "gaussian_knockoffs",
            "knockoff_parameters",
        )
    if np.any(s <= 0):
        raise InputError("all entries of s must be positive", "gaussian_knockoffs", "knockoff_parameters")
    sigma_inv = _inverse_pd(_symmetrize(sigma), "knockoff_parameters")
    mu = d.x - (d.x @ sigma_inv) * s
    return mu, _conditional_covariance(sigma_inv, s, "knockoff_parameters")


def fit_knockoff_model(
    d: Dataset,
    slack: float = DEFAULT_SLACK,
    ladder: Sequence[float] = DEFAULT_SHRINKAGE_LADDER,
    min_eigenvalue: float = DEFAULT_MIN_EIGENVALUE,
) -> KnockoffModel:
    """Estimate the covariance of a standardized dataset and build its knockoff model.

    Args:
        d: A standardized dataset.
        slack: Factor applied to the equicorrelated s-vector.
        ladder: Shrinkage levels for the covariance estimate.
        min_eigenvalue: Required smallest eigenvalue of the covariance estimate.

    Returns:
        The knockoff model.
    """
    d.require_standardized("fit_knockoff_model")
    sigma, gamma = shrink_to_positive_definite(d.x.T @ d.x / d.n, ladder, min_eigenvalue)
    model = KnockoffModel.from_covariance(sigma, slack=slack, shrinkage=gamma)
    logger.debug(
        "Knockoff model: p=%d, s=%.4g, lambda_min(V)=%.4g, gamma=%g", model.p, model.s[0], model.v_min_eigenvalue, gamma
    )
    return model


def sample_knockoffs(d: Dataset, model: KnockoffModel, seed: int) -> KnockoffCopy:
    """Draw a knockoff copy of the design matrix.

    Row i is mu_i + L z_i, where L is the Cholesky factor of V and z_i a standard normal vector. All normal draws
    come from one generator seeded with `seed`, filled row by row.

    Args:
        d: A standardized dataset.
        model: Knockoff model with p matching the dataset.
        seed: Seed of the normal draws.

    Returns:
        The knockoff copy.

    Raises:
        InputError: If the model and dataset dimensions differ.
    """
    d.require_standardized("sample_knockoffs")
    if model.p != d.p:
        raise InputError(
            f"knockoff model has p={model.p} but the dataset has p={d.p}", "gaussian_knockoffs", "sample_knockoffs"
        )
    z = np.random.default_rng(seed).standard_normal((d.n, d.p))
    x_tilde = model.conditional_mean(d.x) + z @ model.v_factor.T
    return KnockoffCopy(x_tilde=x_tilde, seed=int(seed), parent_hash=d.checksum)
