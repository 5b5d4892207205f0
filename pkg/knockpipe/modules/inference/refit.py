"""Unpenalized refits on a selected support: logistic MLE, least squares and average marginal effects."""

from __future__ import annotations

import dataclasses
from collections.abc import Iterable
from enum import Enum

import numpy as np
import scipy.linalg
from scipy import stats
from scipy.special import expit, logit

from knockpipe.core.misc import ComputationError, ConvergenceError, InputError, SeparationError, get_logger
from knockpipe.modules.data_model import Dataset

logger = get_logger(__name__)

INTERCEPT = "(Intercept)"


class RefitKind(Enum):
    """Refit model families."""

    logistic = "logistic"
    ols = "ols"


class Scale(Enum):
    """Scale of the regressors in a refit."""

    standardized_all = "standardized_all"
    standardized_continuous_only = "standardized_continuous_only"
    raw = "raw"


@dataclasses.dataclass(frozen=True, eq=False)
class RefitEstimates:
    """Estimates of an unpenalized refit. Index 0 of every vector is the intercept.

    Attributes:
        support: Sorted 0-based column indices of the regressors.
        kind: Model family.
        coef: Coefficients.
        se: Standard errors (nan where undefined).
        p_values: Two-sided p-values.
        scale: Scale of the regressors.
        labels: Intercept label followed by the column names of the support.
        covariance: Estimated covariance matrix of `coef`.
        iterations: Number of IRLS iterations (0 for least squares).
        marginal_effects: Average marginal effects of the support columns (logistic only).
        marginal_effects_se: Delta-method standard errors of the marginal effects.
    """

    support: tuple[int, ...]
    kind: RefitKind
    coef: np.ndarray
    se: np.ndarray
    p_values: np.ndarray
    scale: Scale
    labels: tuple[str, ...]
    covariance: np.ndarray
    iterations: int = 0
    marginal_effects: np.ndarray | None = None
    marginal_effects_se: np.ndarray | None = None

    @property
    def intercept(self) -> float:
        """The intercept."""
        return float(self.coef[0])

    @property
    def beta(self) -> np.ndarray:
        """Coefficients of the support columns."""
        return self.coef[1:]

    @property
    def stars(self) -> tuple[str, ...]:
        """Significance stars per coefficient."""
        return tuple(significance_stars(p) for p in self.p_values)


def significance_stars(p_value: float) -> str:
    """Return '***', '**' or '*' for two-sided p-values below 0.01, 0.05 and 0.1.

    Args:
        p_value: The p-value.

    Returns:
        The stars, or an empty string.
    """
    if not np.isfinite(p_value):
        return ""
    if p_value < 0.01:
        return "***"
    if p_value < 0.05:
        return "**"
    if p_value < 0.1:
        return "*"
    return ""


def _check_support(d: Dataset, support: Iterable[int], function: str) -> tuple[int, ...]:
    support = tuple(sorted({int(j) for j in support}))
    for j in support:
        if not 0 <= j < d.p:
            raise InputError(f"index out of range: {j + 1} (dataset has {d.p} columns)", "inference", function)
    if len(support) >= d.n:
        raise InputError(
            f"the support has {len(support)} columns but there are only {d.n} observations", "inference", function
        )
    return support


def design_matrix(d: Dataset, support: tuple[int, ...], scale: Scale) -> np.ndarray:
    """Return the regressor matrix [1, X_S] on the requested scale.

    Args:
        d: The dataset.
        support: 0-based column indices.
        scale: `raw` uses raw values, `standardized_all` the standardized columns and `standardized_continuous_only`
            the standardized columns except binary ones, which keep their raw 0/1 values.

    Returns:
        Matrix with an intercept column followed by the support columns.
    """
    columns = list(support)
    if scale is Scale.raw or not d.standardized:
        x = d.raw_x()[:, columns]
    else:
        x = np.array(d.x[:, columns])
        if scale is Scale.standardized_continuous_only:
            binary = d.binary_columns[columns]
            x[:, binary] = d.raw_x()[:, columns][:, binary]
    return np.column_stack([np.ones(d.n), x])


def _is_separated(eta: np.ndarray, y: np.ndarray) -> bool:
    return bool(np.all(np.where(y == 1, eta > 0, eta < 0)))


def _mean_nll(eta: np.ndarray, y: np.ndarray) -> float:
    return float(np.mean(np.logaddexp(0.0, eta) - y * eta))


def _solve_pd(matrix: np.ndarray, rhs: np.ndarray, function: str) -> np.ndarray:
    try:
        return scipy.linalg.solve(matrix, rhs, assume_a="pos")
    except (np.linalg.LinAlgError, ValueError):
        raise ComputationError("singular information matrix", "inference", function) from None


def _inverse_information(x: np.ndarray, weights: np.ndarray, function: str) -> np.ndarray:
    information = x.T @ (weights[:, None] * x)
    if np.linalg.cond(information) > 1e14:
        raise ComputationError("singular information matrix", "inference", function)
    covariance = _solve_pd(information, np.eye(len(information)), function)
    return (covariance + covariance.T) / 2


def refit_logistic(
    d: Dataset,
    support: Iterable[int],
    scale: Scale = Scale.standardized_all,
    tol: float = 1e-10,
    max_iter: int = 100,
) -> RefitEstimates:
    """Fit the unpenalized logistic model on the support columns plus an intercept.

    Newton steps (iteratively reweighted least squares) with step halving are taken until the largest entry of
    the mean score is below `tol`. Standard errors come from the inverse Fisher information, p-values from the
    normal distribution. Average marginal effects are included.

    Args:
        d: The dataset.
        support: 0-based column indices.
        scale: Scale of the regressors.
        tol: Convergence tolerance on the mean score.
        max_iter: Maximum number of Newton iterations.

    Returns:
        The estimates.

    Raises:
        InputError: If the support is invalid or the response is constant.
        SeparationError: If the classes are separable on the support, so the MLE does not exist.
        ComputationError: If the information matrix is singular.
        ConvergenceError: If the iterations do not converge.
    """
    support = _check_support(d, support, "refit_logistic")
    x = design_matrix(d, support, scale)
    y = d.y.astype(float)
    y_bar = float(np.mean(y))
    if y_bar in {0.0, 1.0}:
        raise InputError("degenerate response: all values of y are equal", "inference", "refit_logistic")

    coef = np.zeros(x.shape[1])
    coef[0] = logit(y_bar)
    eta = x @ coef
    loss = _mean_nll(eta, y)
    iterations = 0
    while True:
        prob = expit(eta)
        score = x.T @ (y - prob) / d.n
        if np.max(np.abs(score)) <= tol:
            break
        if iterations >= max_iter:
            raise ConvergenceError(
                f"IRLS did not converge within {max_iter} iterations (max |score| = {np.max(np.abs(score)):.3g})",
                "inference",
                "refit_logistic",
            )
        weights = prob * (1 - prob)
        step = _solve_pd(x.T @ (weights[:, None] * x) / d.n, score, "refit_logistic")
        # Step halving
        for _ in range(60):
            candidate = coef + step
            candidate_eta = x @ candidate
            candidate_loss = _mean_nll(candidate_eta, y)
            if candidate_loss <= loss + 1e-15 * (1 + abs(loss)):
                break
            step /= 2
        coef, eta, loss = candidate, candidate_eta, candidate_loss
        iterations += 1
        if _is_separated(eta, y):
            norm = float(np.linalg.norm(coef))
            raise SeparationError(
                f"the classes are separable on the support, the MLE does not exist (||coef|| = {norm:.3g} "
                f"after {iterations} iterations)",
                norm,
                "inference",
                "refit_logistic",
            )

    prob = expit(eta)
    weights = prob * (1 - prob)
    covariance = _inverse_information(x, weights, "refit_logistic")
    se = np.sqrt(np.diag(covariance))
    p_values = 2 * stats.norm.sf(np.abs(coef / se))
    ame, ame_se = _marginal_effects(x, coef, covariance)
    logger.debug("Logistic refit on %d columns converged after %d iterations", len(support), iterations)
    return RefitEstimates(
        support=support,
        kind=RefitKind.logistic,
        coef=coef,
        se=se,
        p_values=p_values,
        scale=scale,
        labels=(INTERCEPT, *(d.column_names[j] for j in support)),
        covariance=covariance,
        iterations=iterations,
        marginal_effects=ame,
        marginal_effects_se=ame_se,
    )


def refit_ols(d: Dataset, support: Iterable[int], scale: Scale = Scale.standardized_all) -> RefitEstimates:
    """Fit y on the support columns plus an intercept by least squares, with classical standard errors.

    Args:
        d: The dataset.
        support: 0-based column indices.
        scale: Scale of the regressors.

    Returns:
        The estimates; standard errors and p-values are nan when there are no residual degrees of freedom.

    Raises:
        ComputationError: If the regressor matrix is rank deficient.
    """
    support = _check_support(d, support, "refit_ols")
    x = design_matrix(d, support, scale)
    y = d.y.astype(float)
    coef, _, rank, _ = np.linalg.lstsq(x, y, rcond=None)
    if rank < x.shape[1]:
        raise ComputationError(
            f"rank-deficient regressors: rank {rank} with {x.shape[1]} columns", "inference", "refit_ols"
        )
    residual = y - x @ coef
    dof = d.n - x.shape[1]
    xtx_inv = _solve_pd(x.T @ x, np.eye(x.shape[1]), "refit_ols")
    if dof > 0:
        sigma2 = float(residual @ residual) / dof
        covariance = sigma2 * (xtx_inv + xtx_inv.T) / 2
        se = np.sqrt(np.diag(covariance))
        with np.errstate(divide="ignore", invalid="ignore"):
            p_values = 2 * stats.t.sf(np.abs(coef / se), dof)
    else:
        covariance = np.full_like(xtx_inv, np.nan)
        se = np.full(x.shape[1], np.nan)
        p_values = np.full(x.shape[1], np.nan)
    return RefitEstimates(
        support=support,
        kind=RefitKind.ols,
        coef=coef,
        se=se,
        p_values=p_values,
        scale=scale,
        labels=(INTERCEPT, *(d.column_names[j] for j in support)),
        covariance=covariance,
    )


def average_marginal_effects(beta: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """Return beta_j * mean_i p_i (1 - p_i), with p = expit(eta).

    Args:
        beta: Coefficients (without intercept).
        eta: Linear predictor per observation.

    Returns:
        One marginal effect per coefficient.
    """
    prob = expit(np.asarray(eta, dtype=float))
    return np.asarray(beta, dtype=float) * float(np.mean(prob * (1 - prob)))


def _marginal_effects(x: np.ndarray, coef: np.ndarray, covariance: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    eta = x @ coef
    prob = expit(eta)
    density = prob * (1 - prob)
    beta = coef[1:]
    ame = average_marginal_effects(beta, eta)
    # Jacobian of the marginal effects with respect to (intercept, beta)
    jacobian = np.outer(beta, density * (1 - 2 * prob) @ x / len(eta))
    jacobian[:, 1:] += np.mean(density) * np.eye(len(beta))
    variance = np.einsum("ij,jk,ik->i", jacobian, covariance, jacobian)
    return ame, np.sqrt(np.maximum(variance, 0.0))


def marginal_effects(fit: RefitEstimates, d: Dataset) -> np.ndarray:
    """Return the average marginal effects of a logistic refit, treating every regressor as continuous.

    Args:
        fit: Logistic refit.
        d: The dataset the refit was computed on.

    Returns:
        One effect per support column.

    Raises:
        InputError: If the refit is not logistic.
    """
    if fit.kind is not RefitKind.logistic:
        raise InputError("marginal effects need a logistic refit", "inference", "marginal_effects")
    x = design_matrix(d, fit.support, fit.scale)
    return average_marginal_effects(fit.beta, x @ fit.coef)
