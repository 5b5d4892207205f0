"""Unit tests for the public Python interface in knockpipe.api."""

from pathlib import Path

import pytest

from knockpipe import api
from tests import utils

pytestmark = pytest.mark.unit


def test_select_and_refit_through_api(tmp_path: Path) -> None:
    """A CSV file can be loaded, filtered and refitted using only the public interface."""
    d = utils.make_dataset(n=120, p=5, signal={1: 2.5}, seed=3)
    raw = api.load_csv(utils.write_csv(tmp_path / "data.csv", d), "y")
    data = api.standardize(raw)
    settings = api.PipelineSettings(k=1, q=0.2, grid_size=20, min_ratio=1e-2, cv_folds=3)

    result = api.knockoff_select(data, settings, seed=5)
    assert isinstance(result, api.SelectionResult)
    assert result.variant is api.Variant.knockoff_plus
    assert all(0 <= j < 5 for j in result.selected)

    support = result.selected or (1,)
    estimates = api.refit_logistic(data, support)
    assert estimates.support == tuple(sorted(support))
    assert len(estimates.labels) == len(support) + 1


def test_errors_are_exported() -> None:
    """The error hierarchy is available for callers catching knockpipe failures."""
    assert issubclass(api.InputError, api.KnockpipeErrorMessage)
    assert issubclass(api.SeparationError, api.ComputationError)
    assert issubclass(api.ConvergenceError, api.ComputationError)
