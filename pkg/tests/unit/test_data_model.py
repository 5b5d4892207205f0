"""Unit tests for knockpipe.modules.data_model."""

from pathlib import Path

import numpy as np
import pytest

from knockpipe.core.misc import InputError
from knockpipe.modules.data_model import Dataset, destandardize, load_csv, make_folds, standardize

pytestmark = pytest.mark.unit


def _write(tmp_path: Path, text: str) -> Path:
    path = tmp_path / "data.csv"
    path.write_text(text, encoding="utf-8")
    return path


def test_load_csv_reads_columns_in_header_order(tmp_path: Path) -> None:
    """Every column except the response becomes a predictor, in header order."""
    path = _write(tmp_path, "b,y,a\n1.5,0,2\n2.5,1,4\n3.5,1,7\n")
    d = load_csv(path, "y")
    assert d.column_names == ("b", "a")
    np.testing.assert_array_equal(d.x, [[1.5, 2], [2.5, 4], [3.5, 7]])
    np.testing.assert_array_equal(d.y, [0, 1, 1])
    assert not d.standardized


@pytest.mark.parametrize(
    ("text", "message"),
    [
        ("a,b\n1,0\n2,1\n", "missing response column 'y'"),
        ("a,y\n1,0\n2,2\n", "non-binary response"),
        ("a,y\n1,0\nfoo,1\n", "non-numeric value 'foo'"),
        ("a,y\n1,0\n,1\n", "non-numeric value"),
    ],
)
def test_load_csv_rejects_invalid_files(tmp_path: Path, text: str, message: str) -> None:
    """Malformed files are input errors with exit code 2."""
    with pytest.raises(InputError, match=message) as excinfo:
        load_csv(_write(tmp_path, text), "y")
    assert excinfo.value.exit_code == 2


def test_load_csv_missing_file(tmp_path: Path) -> None:
    """A missing file is reported as an input error."""
    with pytest.raises(InputError, match="file not found"):
        load_csv(tmp_path / "missing.csv", "y")


def test_standardize_centers_and_scales() -> None:
    """Standardized columns have mean 0 and sum of squares n."""
    rng = np.random.default_rng(1)
    x = rng.normal(5, 3, size=(50, 4))
    d = standardize(Dataset(x, rng.integers(0, 2, 50), ("a", "b", "c", "d")))
    assert d.standardized
    np.testing.assert_allclose(d.x.mean(axis=0), 0, atol=1e-12)
    np.testing.assert_allclose(np.sum(d.x**2, axis=0), 50, rtol=1e-10)
    np.testing.assert_allclose(d.raw_x(), x, rtol=1e-12)


def test_standardize_rejects_constant_column() -> None:
    """A zero-variance column cannot be scaled."""
    x = np.column_stack([np.arange(4.0), np.full(4, 3.0)])
    with pytest.raises(InputError, match="constant column b"):
        standardize(Dataset(x, [0, 1, 0, 1], ("a", "b")))


def test_standardize_twice_is_an_error() -> None:
    """A standardized dataset is not standardized again."""
    d = standardize(Dataset(np.arange(8.0).reshape(4, 2) ** 2, [0, 1, 0, 1], ("a", "b")))
    with pytest.raises(InputError, match="already standardized"):
        standardize(d)


def test_destandardize_recovers_raw_values() -> None:
    """Destandardizing returns the original raw matrix."""
    x = np.array([[1.0, 10.0], [2.0, 30.0], [4.0, 20.0], [8.0, 0.0]])
    d = destandardize(standardize(Dataset(x, [0, 1, 1, 0], ("a", "b"))))
    assert not d.standardized
    np.testing.assert_allclose(d.x, x, rtol=1e-12)


def test_take_and_transform_use_the_training_map() -> None:
    """Rows taken from a dataset are raw; transform applies the dataset's own standardization."""
    rng = np.random.default_rng(2)
    full = Dataset(rng.normal(size=(30, 3)), rng.integers(0, 2, 30), ("a", "b", "c"))
    training = standardize(full.take(np.arange(20)))
    np.testing.assert_allclose(training.transform(full.x[:20]), training.x, atol=1e-12)


def test_binary_columns_are_detected() -> None:
    """Columns whose raw values are 0/1 are flagged as binary."""
    x = np.array([[0, 1.5], [1, 2.5], [1, 0.5], [0, 3.0]])
    d = standardize(Dataset(x, [0, 1, 1, 0], ("flag", "amount")))
    np.testing.assert_array_equal(d.binary_columns, [True, False])


def test_dataset_rejects_non_binary_response() -> None:
    """The response must be 0/1."""
    with pytest.raises(InputError, match="non-binary response"):
        Dataset(np.ones((3, 1)), [0, 1, 2], ("a",))


def test_dataset_is_immutable() -> None:
    """Arrays of a dataset are read-only."""
    d = Dataset(np.arange(6.0).reshape(3, 2), [0, 1, 0], ("a", "b"))
    with pytest.raises(ValueError, match="read-only"):
        d.x[0, 0] = 1.0


def test_checksum_depends_on_content() -> None:
    """Identical data gives identical checksums, different data different ones."""
    x = np.arange(6.0).reshape(3, 2)
    first = Dataset(x, [0, 1, 0], ("a", "b"))
    assert first.checksum == Dataset(x.copy(), [0, 1, 0], ("a", "b")).checksum
    assert first.checksum != Dataset(x, [1, 1, 0], ("a", "b")).checksum


def test_make_folds_sizes_differ_by_at_most_one() -> None:
    """Folds are balanced and cover every observation exactly once."""
    folds = make_folds(23, 5, seed=3)
    sizes = folds.sizes()
    assert sizes.sum() == 23
    assert sizes.max() - sizes.min() <= 1
    validation = np.concatenate([valid for _, valid in folds.splits()])
    np.testing.assert_array_equal(np.sort(validation), np.arange(23))


def test_make_folds_stratified() -> None:
    """Stratified folds spread the positives evenly."""
    y = np.array([1] * 10 + [0] * 30)
    folds = make_folds(40, 10, stratify_by=y, seed=4)
    positives = [int(y[valid].sum()) for _, valid in folds.splits()]
    assert positives == [1] * 10


def test_make_folds_is_deterministic() -> None:
    """The same seed gives the same assignment."""
    np.testing.assert_array_equal(make_folds(50, 10, seed=7).fold_of, make_folds(50, 10, seed=7).fold_of)
    assert not np.array_equal(make_folds(50, 10, seed=7).fold_of, make_folds(50, 10, seed=8).fold_of)


@pytest.mark.parametrize(("n", "k"), [(10, 1), (3, 4)])
def test_make_folds_rejects_invalid_k(n: int, k: int) -> None:
    """The number of folds must be between 2 and n."""
    with pytest.raises(InputError):
        make_folds(n, k)


def test_standardize_two_point_column() -> None:
    """A column (0, 2) becomes (-1, 1)."""
    d = standardize(Dataset(np.array([[0.0], [2.0]]), [0, 1], ("a",)))
    np.testing.assert_allclose(d.x[:, 0], [-1.0, 1.0])


def test_make_folds_uneven_sizes() -> None:
    """Ten observations in three folds give sizes 4, 3 and 3."""
    assert sorted(make_folds(10, 3, seed=0).sizes().tolist()) == [3, 3, 4]
