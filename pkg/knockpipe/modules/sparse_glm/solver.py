"""Coordinate descent for l1-penalized logistic regression.

The objective is

    F(b0, beta) = mean_i [log(1 + exp(eta_i)) - y_i eta_i] + r * ||beta||_1,    eta = b0 + X beta

with an unpenalized intercept b0. Each coordinate step minimizes a quadratic majorizer of the loss with curvature
bound h_j = mean(x_j^2) / 4, which makes every step non-increasing in F.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np
from scipy.special import expit, logit

from knockpipe.core.misc import InputError, get_logger

logger = get_logger(__name__)

# Full passes between two estimates of the convergence rate
STALL_WINDOW = 50


@dataclasses.dataclass(frozen=True)
class SolverSettings:
    """Stopping rules of the coordinate descent solver.

    Attributes:
        tol: Largest coefficient change in a pass at which the fit counts as converged.
        max_passes: Maximum number of passes over the coordinates.
        kkt_tol: Tolerance of the KKT certificate checked on converged fits.
    """

    tol: float = 1e-7
    max_passes: int = 100_000
    kkt_tol: float = 1e-4

    @classmethod
    def from_config(cls, cfg: dict) -> SolverSettings:
        """Create settings from the `solver` config section."""
        return cls(tol=cfg["tol"], max_passes=cfg["max_passes"], kkt_tol=cfg["kkt_tol"])


@dataclasses.dataclass(frozen=True, eq=False)
class LassoFit:
    """Result of one penalized fit.

    Attributes:
        r: Penalty level.
        intercept: Unpenalized intercept.
        beta: Coefficient vector (length p, or 2p for knockoff-augmented fits).
        objective: Penalized mean negative log-likelihood at the solution.
        iterations: Number of coordinate descent passes.
        converged: Whether the stopping rule was met.
        diverged: Whether the coefficients grew without bound because the classes are separable.
    """

    r: float
    intercept: float
    beta: np.ndarray
    objective: float
    iterations: int
    converged: bool
    diverged: bool = False

    def __post_init__(self) -> None:
        """Freeze the coefficient vector."""
        beta = np.array(self.beta, dtype=float, copy=True)
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)

    @property
    def support(self) -> np.ndarray:
        """Indices of the nonzero coefficients."""
        return np.flatnonzero(self.beta)


def _check_response(y: np.ndarray, function: str) -> float:
    y_bar = float(np.mean(y))
    if y_bar in {0.0, 1.0}:
        raise InputError("degenerate response: all values of y are equal", "sparse_glm", function)
    return y_bar


def mean_nll(x: np.ndarray, y: np.ndarray, intercept: float, beta: np.ndarray) -> float:
    """Return the mean negative log-likelihood of a logistic model.

    Args:
        x: Design matrix.
        y: Binary response.
        intercept: Intercept.
        beta: Coefficients.

    Returns:
        mean_i [log(1 + exp(eta_i)) - y_i eta_i].
    """
    eta = intercept + x @ beta
    return float(np.mean(np.logaddexp(0.0, eta) - y * eta))


def nll_gradient(x: np.ndarray, y: np.ndarray, intercept: float, beta: np.ndarray) -> tuple[float, np.ndarray]:
    """Return the gradient of `mean_nll` with respect to the intercept and the coefficients.

    Args:
        x: Design matrix.
        y: Binary response.
        intercept: Intercept.
        beta: Coefficients.

    Returns:
        Tuple (d/d intercept, d/d beta).
    """
    residual = expit(intercept + x @ beta) - y
    return float(np.mean(residual)), x.T @ residual / len(y)


def lambda_max(x: np.ndarray, y: np.ndarray) -> float:
    """Return the smallest penalty at which all coefficients are zero.

    Args:
        x: Standardized design matrix (or augmented matrix).
        y: Binary response.

    Returns:
        max_j |x_j^T (y - mean(y))| / n.
    """
    y_bar = _check_response(y, "lambda_max")
    return float(np.max(np.abs(x.T @ (y - y_bar))) / len(y))


def kkt_violation(x: np.ndarray, y: np.ndarray, fit: LassoFit) -> float:
    """Return the largest violation of the KKT conditions of a fit.

    For zero coefficients the violation is max(|g_j| - r, 0), for nonzero coefficients |g_j + r sign(beta_j)|, and
    for the intercept |g_0|, where g is the gradient of the mean negative log-likelihood.

    Args:
        x: Design matrix the fit was computed on.
        y: Binary response.
        fit: The fit to check.

    Returns:
        The largest violation.
    """
    g0, g = nll_gradient(x, y, fit.intercept, fit.beta)
    zero = fit.beta == 0
    violation = np.where(zero, np.maximum(np.abs(g) - fit.r, 0.0), np.abs(g + fit.r * np.sign(fit.beta)))
    return float(max(abs(g0), np.max(violation, initial=0.0)))


def _soft_threshold(value: float, threshold: float) -> float:
    if value > threshold:
        return value - threshold
    if value < -threshold:
        return value + threshold
    return 0.0


def _is_separated(eta: np.ndarray, y: np.ndarray) -> bool:
    return bool(np.all(np.where(y == 1, eta > 0, eta < 0)))


def fit_logistic_lasso(
    x: np.ndarray,
    y: np.ndarray,
    r: float,
    warm: LassoFit | None = None,
    settings: SolverSettings | None = None,
    r_max: float | None = None,
) -> LassoFit:
    """Fit l1-penalized logistic regression with an unpenalized intercept.

    Coordinates are visited cyclically. After each full pass the solver iterates over the nonzero coefficients
    only, until they settle, and then makes another full pass; it stops when a full pass changes no coefficient
    by more than `settings.tol`. It gives up early when the observed rate of convergence cannot reach `settings.tol`
    within `settings.max_passes`.

    Args:
        x: Standardized design matrix (n x p).
        y: Binary response.
        r: Penalty level, r >= 0.
        warm: Previous fit to start from (same number of columns).
        settings: Stopping rules.
        r_max: Precomputed `lambda_max(x, y)`.

    Returns:
        The fit. `converged` is False if the pass limit was reached or projected to be exceeded, or the
        coefficients diverged.

    Raises:
        InputError: If r is negative, the shapes disagree or y is constant.
    """
    settings = settings or SolverSettings()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = x.shape
    if r < 0:
        raise InputError(f"the penalty must be nonnegative, got {r}", "sparse_glm", "fit_logistic_lasso")
    if y.shape != (n,):
        raise InputError("x and y have different numbers of rows", "sparse_glm", "fit_logistic_lasso")
    y_bar = _check_response(y, "fit_logistic_lasso")
    if r_max is None:
        r_max = lambda_max(x, y)

    null_intercept = float(logit(y_bar))
    if r >= r_max:
        beta = np.zeros(p)
        return LassoFit(r, null_intercept, beta, mean_nll(x, y, null_intercept, beta), 0, True)

    if warm is not None and len(warm.beta) == p:
        intercept, beta = warm.intercept, np.array(warm.beta, dtype=float)
    else:
        intercept, beta = null_intercept, np.zeros(p)

    curvature = np.mean(x**2, axis=0) / 4
    eta = intercept + x @ beta
    residual = expit(eta) - y

    def objective() -> float:
        return float(np.mean(np.logaddexp(0.0, eta) - y * eta) + r * np.sum(np.abs(beta)))

    def sweep(coordinates: np.ndarray) -> float:
        nonlocal intercept, eta, residual
        max_change = 0.0
        for j in coordinates:
            if curvature[j] == 0:
                continue
            gradient = x[:, j] @ residual / n
            new = _soft_threshold(beta[j] - gradient / curvature[j], r / curvature[j])
            change = new - beta[j]
            if change != 0.0:
                beta[j] = new
                eta += change * x[:, j]
                residual = expit(eta) - y
                max_change = max(max_change, abs(change))
        # Intercept, curvature bound 1/4
        change = -4 * float(np.mean(residual))
        if change != 0.0:
            intercept += change
            eta += change
            residual = expit(eta) - y
            max_change = max(max_change, abs(change))
        return max_change

    all_coordinates = np.arange(p)
    previous = objective()
    passes = 0
    converged = diverged = False
    projected = 0.0
    full_changes: list[float] = []
    while passes < settings.max_passes:
        full_change = sweep(all_coordinates)
        passes += 1
        previous = _check_decrease(objective(), previous, passes)
        if full_change < settings.tol:
            converged = True
            break
        if r == 0 and _is_separated(eta, y):
            diverged = True
            break
        full_changes.append(full_change)
        projected = _projected_passes(full_changes, passes, settings.tol)
        if projected > settings.max_passes:
            break
        active = np.flatnonzero(beta)
        while passes < settings.max_passes:
            change = sweep(active)
            passes += 1
            previous = _check_decrease(objective(), previous, passes)
            if change < settings.tol:
                break
            if r == 0 and _is_separated(eta, y):
                diverged = True
                break
        if diverged:
            break

    fit = LassoFit(r, intercept, beta, previous, passes, converged, diverged)
    if diverged:
        logger.warning(
            "Coefficients diverge at r=0: the classes are separable (||beta|| = %.3g after %d passes)",
            np.linalg.norm(beta),
            passes,
        )
    elif projected > settings.max_passes:
        logger.warning(
            "Coordinate descent stalled at r=%.6g after %d passes (about %.3g passes needed, limit %d)",
            r,
            passes,
            projected,
            settings.max_passes,
        )
    elif not converged:
        logger.warning("Coordinate descent did not converge at r=%.6g within %d passes", r, settings.max_passes)
    else:
        violation = kkt_violation(x, y, fit)
        if violation > settings.kkt_tol:
            logger.warning("KKT violation %.3g exceeds %.3g at r=%.6g", violation, settings.kkt_tol, r)
    return fit


def _projected_passes(full_changes: list[float], passes: int, tol: float) -> float:
    """Extrapolate the total number of passes needed to reach `tol`.

    Every `STALL_WINDOW` full passes, the largest full-pass change of the last window is compared with that of the
    window before, assuming linear convergence at the observed rate. Returns 0 between checks and inf if the change
    did not decrease at all.
    """
    count = len(full_changes)
    if count < 2 * STALL_WINDOW or count % STALL_WINDOW:
        return 0.0
    earlier = max(full_changes[-2 * STALL_WINDOW : -STALL_WINDOW])
    latest = max(full_changes[-STALL_WINDOW:])
    if latest >= earlier:
        return math.inf
    rate = (latest / earlier) ** (1 / STALL_WINDOW)
    remaining = math.log(tol / latest) / math.log(rate)
    return passes + remaining * passes / count


def _check_decrease(current: float, previous: float, passes: int) -> float:
    if current > previous + 1e-12 * (1 + abs(previous)):
        logger.warning("Objective increased from %.17g to %.17g in pass %d", previous, current, passes)
    return current
