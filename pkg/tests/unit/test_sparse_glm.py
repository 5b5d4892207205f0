"""Unit tests for knockpipe.modules.sparse_glm."""

import logging
import math

import numpy as np
import pytest
from scipy.optimize import minimize

from knockpipe.core.misc import InputError
from knockpipe.modules.data_model import make_folds
from knockpipe.modules.sparse_glm import (
    SolverSettings,
    cross_validate_lambda,
    entry_levels,
    fit_logistic_lasso,
    fit_path,
    fit_path_on_grid,
    kkt_violation,
    lambda_max,
    make_grid,
    mean_nll,
    nll_gradient,
)
from knockpipe.modules.sparse_glm.solver import STALL_WINDOW, _projected_passes
from tests.utils import make_dataset

pytestmark = pytest.mark.unit


@pytest.fixture(scope="module")
def data() -> tuple[np.ndarray, np.ndarray]:
    """Small standardized design with two signal columns."""
    d = make_dataset(n=150, p=6, signal={0: 1.5, 1: -1.0}, seed=21)
    return d.x, d.y.astype(float)


def _objective(params: np.ndarray, x: np.ndarray, y: np.ndarray, r: float) -> float:
    return mean_nll(x, y, params[0], params[1:]) + r * np.sum(np.abs(params[1:]))


def _split(params: np.ndarray) -> tuple[float, np.ndarray]:
    return params[0], params[1:]


def test_gradient_matches_finite_differences(data: tuple[np.ndarray, np.ndarray]) -> None:
    """The analytic gradient of the mean negative log-likelihood agrees with central differences."""
    x, y = data
    rng = np.random.default_rng(0)
    intercept, beta = 0.3, rng.normal(size=x.shape[1]) * 0.5
    g0, g = nll_gradient(x, y, intercept, beta)
    h = 1e-6
    numeric_g0 = (mean_nll(x, y, intercept + h, beta) - mean_nll(x, y, intercept - h, beta)) / (2 * h)
    assert g0 == pytest.approx(numeric_g0, abs=1e-7)
    for j in range(x.shape[1]):
        step = np.zeros_like(beta)
        step[j] = h
        numeric = (mean_nll(x, y, intercept, beta + step) - mean_nll(x, y, intercept, beta - step)) / (2 * h)
        assert g[j] == pytest.approx(numeric, abs=1e-7)


def test_gradient_on_random_instances() -> None:
    """Central differences reproduce the gradient on many small random problems."""
    rng = np.random.default_rng(17)
    h = 1e-5
    for _ in range(100):
        n, p = int(rng.integers(5, 40)), int(rng.integers(1, 6))
        x = rng.standard_normal((n, p))
        y = rng.integers(0, 2, size=n).astype(float)
        params = rng.normal(size=p + 1)
        g0, g = nll_gradient(x, y, params[0], params[1:])
        numeric = [
            (mean_nll(x, y, *_split(params + h * e)) - mean_nll(x, y, *_split(params - h * e))) / (2 * h)
            for e in np.eye(p + 1)
        ]
        np.testing.assert_allclose(np.concatenate([[g0], g]), numeric, rtol=1e-6, atol=1e-9)


def test_lambda_max_gives_null_model(data: tuple[np.ndarray, np.ndarray]) -> None:
    """At r = lambda_max every coefficient is zero and the intercept is logit(mean(y))."""
    x, y = data
    r_max = lambda_max(x, y)
    fit = fit_logistic_lasso(x, y, r_max)
    assert np.all(fit.beta == 0)
    assert fit.intercept == pytest.approx(np.log(y.mean() / (1 - y.mean())))
    # Just below lambda_max at least one coefficient enters
    assert np.count_nonzero(fit_logistic_lasso(x, y, 0.95 * r_max).beta) >= 1


def test_lambda_max_degenerate_response() -> None:
    """A constant response has no finite null model."""
    with pytest.raises(InputError, match="degenerate response"):
        lambda_max(np.eye(3), np.ones(3))


@pytest.mark.parametrize("ratio", [0.5, 0.1, 0.02])
def test_solution_matches_generic_optimizer(data: tuple[np.ndarray, np.ndarray], ratio: float) -> None:
    """Coordinate descent reaches the objective value of a derivative-free optimizer, or better."""
    x, y = data
    r = ratio * lambda_max(x, y)
    fit = fit_logistic_lasso(x, y, r, settings=SolverSettings(tol=1e-10))
    reference = minimize(
        _objective,
        np.zeros(x.shape[1] + 1),
        args=(x, y, r),
        method="Powell",
        options={"xtol": 1e-10, "ftol": 1e-12, "maxiter": 200000},
    )
    assert fit.converged
    assert fit.objective <= reference.fun + 1e-6
    assert fit.objective == pytest.approx(_objective(np.r_[fit.intercept, fit.beta], x, y, r), rel=1e-12)


@pytest.mark.parametrize("ratio", [0.8, 0.3, 0.05])
def test_kkt_conditions_hold(data: tuple[np.ndarray, np.ndarray], ratio: float) -> None:
    """Converged fits satisfy the optimality conditions of the penalized problem."""
    x, y = data
    fit = fit_logistic_lasso(x, y, ratio * lambda_max(x, y), settings=SolverSettings(tol=1e-10))
    assert kkt_violation(x, y, fit) < 1e-5


def test_warm_start_reaches_same_solution(data: tuple[np.ndarray, np.ndarray]) -> None:
    """Warm and cold starts agree at convergence."""
    x, y = data
    r_max = lambda_max(x, y)
    settings = SolverSettings(tol=1e-10)
    warm = fit_logistic_lasso(x, y, 0.3 * r_max, settings=settings)
    cold = fit_logistic_lasso(x, y, 0.2 * r_max, settings=settings)
    warmed = fit_logistic_lasso(x, y, 0.2 * r_max, warm=warm, settings=settings)
    np.testing.assert_allclose(warmed.beta, cold.beta, atol=1e-6)


def test_negative_penalty_is_rejected(data: tuple[np.ndarray, np.ndarray]) -> None:
    """Penalties must be nonnegative."""
    x, y = data
    with pytest.raises(InputError, match="nonnegative"):
        fit_logistic_lasso(x, y, -0.1)


def test_separable_data_diverges_at_zero_penalty() -> None:
    """Without a penalty perfectly separated classes are flagged instead of iterating forever."""
    x = np.array([[-2.0], [-1.0], [-0.5], [0.5], [1.0], [2.0]])
    x = (x - x.mean()) / x.std()
    y = np.array([0.0, 0, 0, 1, 1, 1])
    fit = fit_logistic_lasso(x, y, 0.0, settings=SolverSettings(max_passes=10000))
    assert fit.diverged
    assert not fit.converged


def test_grid_is_log_spaced_with_exact_endpoints() -> None:
    """The grid runs from r_max down to min_ratio * r_max with constant ratio."""
    grid = make_grid(2.0, 5, 1e-4)
    assert grid[0] == 2.0
    assert grid[-1] == 2.0 * 1e-4
    np.testing.assert_allclose(grid[1:] / grid[:-1], 0.1)


@pytest.mark.parametrize(("size", "ratio"), [(1, 0.1), (10, 0.0), (10, 1.0)])
def test_grid_rejects_invalid_arguments(size: int, ratio: float) -> None:
    """grid_size must be at least 2 and min_ratio in (0, 1)."""
    with pytest.raises(InputError):
        make_grid(1.0, size, ratio)


def test_entry_levels() -> None:
    """Entry level is the first grid value with a nonzero coefficient, 0 if never."""
    grid = np.array([4.0, 2.0, 1.0])
    coefficients = np.array([[0.0, 0.0, 0.0], [0.5, 0.0, 0.0], [0.7, 0.1, 0.0]])
    np.testing.assert_array_equal(entry_levels(grid, coefficients), [2.0, 1.0, 0.0])


def test_path_starts_empty_and_signals_enter_first(data: tuple[np.ndarray, np.ndarray]) -> None:
    """The first fit of the path is the null model and a signal column enters first."""
    x, y = data
    path = fit_path(x, y, grid_size=30, min_ratio=1e-2)
    assert not path.truncated
    assert len(path.fits) == 30
    assert np.all(path.coefficients[0] == 0)
    assert int(np.argmax(path.entry_level)) in {0, 1}
    frame = path.to_frame([f"x{j + 1}" for j in range(x.shape[1])])
    assert list(frame.columns[:3]) == ["r", "intercept", "x1"]
    assert len(frame) == 30


def test_cross_validation_curve(data: tuple[np.ndarray, np.ndarray]) -> None:
    """The CV curve has one finite value per grid point and r_star attains its minimum."""
    x, y = data
    grid = make_grid(lambda_max(x, y), 20, 1e-2)
    folds = make_folds(len(y), 5, stratify_by=y, seed=1)
    r_star, curve = cross_validate_lambda(x, y, folds, grid)
    assert curve.shape == (20,)
    assert np.all(np.isfinite(curve))
    assert r_star == grid[int(np.argmin(curve))]
    # The signal is strong enough that the null model is not optimal
    assert r_star < grid[0]


def test_cross_validation_is_deterministic_across_workers(data: tuple[np.ndarray, np.ndarray]) -> None:
    """Parallel fold fitting gives the same curve as sequential fitting."""
    x, y = data
    grid = make_grid(lambda_max(x, y), 10, 1e-2)
    folds = make_folds(len(y), 4, seed=2)
    _, sequential = cross_validate_lambda(x, y, folds, grid, n_jobs=1)
    _, parallel = cross_validate_lambda(x, y, folds, grid, n_jobs=2)
    np.testing.assert_array_equal(sequential, parallel)


def test_cross_validation_rejects_constant_training_response() -> None:
    """A fold whose training rows all share one class cannot be fitted."""
    x = np.random.default_rng(0).normal(size=(6, 2))
    y = np.array([1.0, 0, 0, 0, 0, 0])
    folds = make_folds(6, 2, stratify_by=None, seed=0)
    fold_of_positive = folds.fold_of[0]
    # The training rows of the positive's own fold are all negative
    with pytest.raises(InputError, match=f"fold {fold_of_positive} has a constant training response"):
        cross_validate_lambda(x, y, folds, np.array([0.1, 0.01]))


def test_projected_passes() -> None:
    """Linear convergence is extrapolated; a change that stops shrinking means the tolerance is out of reach."""
    window = STALL_WINDOW
    changes = [1e-3 * 0.9**i for i in range(2 * window)]
    expected = 2 * window + math.log(1e-4) / math.log(0.9) - window
    assert _projected_passes(changes, 2 * window, 1e-7) == pytest.approx(expected)
    # Twice as many passes as full passes doubles the remaining estimate
    assert _projected_passes(changes, 4 * window, 1e-7) == pytest.approx(4 * window + 2 * (expected - 2 * window))
    assert _projected_passes([1e-3] * (2 * window), 2 * window, 1e-7) == math.inf
    assert _projected_passes(changes[:-1], 2 * window - 1, 1e-7) == 0.0


def test_path_stops_at_first_failed_fit(
    data: tuple[np.ndarray, np.ndarray], caplog: pytest.LogCaptureFixture
) -> None:
    """The path keeps the fits before the first failure and does not try the remaining grid points."""
    x, y = data
    grid = make_grid(lambda_max(x, y), 10, 1e-2)
    with caplog.at_level(logging.WARNING):
        path = fit_path_on_grid(x, y, grid, SolverSettings(max_passes=1))
    assert path.truncated
    assert len(path.fits) == 1
    np.testing.assert_array_equal(path.grid, grid[:1])
    np.testing.assert_array_equal(path.entry_level, 0.0)
    assert caplog.text.count("did not converge") == 1
    assert "Path truncated" in caplog.text
