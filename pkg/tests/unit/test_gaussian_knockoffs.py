"""Unit tests for knockpipe.modules.gaussian_knockoffs."""

import numpy as np
import pytest

from knockpipe.core.misc import InputError, NotPositiveDefiniteError
from knockpipe.modules.data_model import Dataset
from knockpipe.modules.gaussian_knockoffs import (
    KnockoffModel,
    compute_s_equicorrelated,
    estimate_covariance,
    fit_knockoff_model,
    knockoff_parameters,
    sample_knockoffs,
    shrink_to_positive_definite,
)
from tests.utils import make_dataset

pytestmark = pytest.mark.unit

SIGMA_HALF = np.array([[1.0, 0.5], [0.5, 1.0]])


def test_equicorrelated_s_for_two_variables() -> None:
    """With correlation 0.5 the smallest eigenvalue is 0.5, so s = slack * min(1, 1)."""
    np.testing.assert_allclose(compute_s_equicorrelated(SIGMA_HALF, 0.999), [0.999, 0.999])


def test_equicorrelated_s_identity() -> None:
    """For the identity s is capped at the slack."""
    np.testing.assert_allclose(compute_s_equicorrelated(np.eye(4), 0.5), np.full(4, 0.5))


def test_v_smallest_eigenvalue_closed_form() -> None:
    """For Sigma = [[1, .5], [.5, 1]] and s = c, the smallest eigenvalue of V is 2c(1 - c)."""
    model = KnockoffModel.from_covariance(SIGMA_HALF, slack=0.999)
    c = 0.999
    assert model.v_min_eigenvalue == pytest.approx(2 * c * (1 - c), rel=1e-9)
    assert model.v_min_eigenvalue > 0


def test_joint_covariance_is_positive_semidefinite() -> None:
    """The covariance of [X, X~] is positive semi-definite and has the knockoff structure."""
    sigma = 0.7 * np.eye(5) + 0.3
    model = KnockoffModel.from_covariance(sigma)
    g = model.joint_covariance()
    assert np.linalg.eigvalsh(g)[0] > -1e-10
    np.testing.assert_allclose(g[:5, :5], sigma)
    np.testing.assert_allclose(g[5:, 5:], sigma)
    np.testing.assert_allclose(np.diag(g[:5, 5:]), 1 - model.s)


@pytest.mark.parametrize("slack", [0.0, 1.5])
def test_slack_out_of_range(slack: float) -> None:
    """The slack must be in (0, 1]."""
    with pytest.raises(InputError, match="slack"):
        compute_s_equicorrelated(np.eye(2), slack)


def test_shrinkage_ladder_repairs_singular_covariance() -> None:
    """A rank-deficient correlation matrix is shrunk by the first sufficient ladder level."""
    singular = np.ones((3, 3))
    sigma, gamma = shrink_to_positive_definite(singular, ladder=(0.0, 0.01, 0.1), min_eigenvalue=0.05)
    assert gamma == 0.1
    np.testing.assert_allclose(np.diag(sigma), 1.0)
    assert np.linalg.eigvalsh(sigma)[0] >= 0.05 - 1e-12


def test_shrinkage_ladder_exhausted() -> None:
    """If no level is sufficient the covariance is reported as not positive definite."""
    with pytest.raises(NotPositiveDefiniteError):
        shrink_to_positive_definite(np.ones((3, 3)), ladder=(0.0,), min_eigenvalue=1e-6)


def test_estimate_covariance_needs_standardized_data() -> None:
    """Only standardized datasets have a correlation-scale covariance."""
    d = Dataset(np.random.default_rng(0).normal(size=(10, 2)), [0, 1] * 5, ("a", "b"))
    with pytest.raises(InputError, match="standardized"):
        estimate_covariance(d)


def test_estimate_covariance_has_unit_diagonal() -> None:
    """The estimate of a standardized dataset has unit diagonal."""
    sigma = estimate_covariance(make_dataset(n=100, p=6))
    np.testing.assert_allclose(np.diag(sigma), 1.0)


def test_knockoff_parameters_match_model() -> None:
    """mu and V from the free function agree with the model's conditional mean and covariance."""
    d = make_dataset(n=60, p=4, seed=5)
    model = fit_knockoff_model(d)
    mu, v = knockoff_parameters(d, model.sigma, model.s)
    np.testing.assert_allclose(mu, model.conditional_mean(d.x), atol=1e-12)
    np.testing.assert_allclose(v, model.v, atol=1e-12)


def test_knockoff_parameters_rejects_shape_mismatch() -> None:
    """Sigma must match the number of columns."""
    d = make_dataset(n=30, p=3)
    with pytest.raises(InputError, match="shape mismatch"):
        knockoff_parameters(d, np.eye(2), np.ones(2))


def test_sampling_is_deterministic() -> None:
    """The same seed gives a bit-identical knockoff matrix, a different seed a different one."""
    d = make_dataset(n=50, p=5, seed=9)
    model = fit_knockoff_model(d)
    first = sample_knockoffs(d, model, 7)
    np.testing.assert_array_equal(first.x_tilde, sample_knockoffs(d, model, 7).x_tilde)
    assert not np.array_equal(first.x_tilde, sample_knockoffs(d, model, 8).x_tilde)
    assert first.parent_hash == d.checksum


def test_augmented_checks_parent() -> None:
    """A knockoff copy can only be joined with the dataset it was drawn from."""
    d = make_dataset(n=40, p=3, seed=1)
    copy = sample_knockoffs(d, fit_knockoff_model(d), 0)
    assert copy.augmented(d).shape == (40, 6)
    with pytest.raises(InputError, match="different dataset"):
        copy.augmented(make_dataset(n=40, p=3, seed=2))


@pytest.mark.montecarlo
@pytest.mark.parametrize("rho", [0.0, 0.5])
def test_knockoff_covariance_matches_target(rho: float) -> None:
    """On a large equicorrelated sample the empirical covariance of [X, X~] approaches the joint covariance."""
    rng = np.random.default_rng(11)
    p, n = 20, 10000
    sigma = (1 - rho) * np.eye(p) + rho
    x = rng.standard_normal((n, p)) @ np.linalg.cholesky(sigma).T
    d = Dataset(x, rng.integers(0, 2, n), tuple(f"x{j + 1}" for j in range(p)), standardized=True)
    model = KnockoffModel.from_covariance(sigma)
    copy = sample_knockoffs(d, model, 3)
    empirical = np.cov(np.hstack([x, copy.x_tilde]), rowvar=False)
    assert np.max(np.abs(empirical - model.joint_covariance())) < 0.05


def test_equicorrelated_s_strong_correlation() -> None:
    """With correlation 0.9 the smallest eigenvalue 0.1 limits s to 0.2."""
    np.testing.assert_allclose(compute_s_equicorrelated(np.array([[1.0, 0.9], [0.9, 1.0]]), 1.0), [0.2, 0.2])


def test_identity_covariance_gives_independent_knockoffs() -> None:
    """For Sigma = I and s = 1 the knockoffs have mean 0 and covariance I, whatever X is."""
    d = make_dataset(n=20, p=3, seed=2)
    mu, v = knockoff_parameters(d, np.eye(3), np.ones(3))
    np.testing.assert_allclose(mu, 0, atol=1e-12)
    np.testing.assert_allclose(v, np.eye(3), atol=1e-12)
