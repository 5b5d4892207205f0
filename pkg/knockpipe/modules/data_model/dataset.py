"""The Dataset type, CSV ingestion and standardization."""

from __future__ import annotations

import dataclasses
from collections.abc import Sequence
from functools import cached_property
from pathlib import Path

import numpy as np
import pandas as pd

from knockpipe.core.io import array_checksum
from knockpipe.core.misc import InputError, get_logger

logger = get_logger(__name__)

MEAN_TOL = 1e-10
SCALE_RTOL = 1e-8


def _readonly(array: np.ndarray, dtype: type = float) -> np.ndarray:
    array = np.array(array, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclasses.dataclass(frozen=True, eq=False)
class Dataset:
    """Design matrix, binary response and column metadata.

    Instances are immutable; arrays are copied and marked read-only on construction, so a dataset can be shared
    between parallel workers.

    Attributes:
        x: Design matrix with n rows and p columns.
        y: Binary response of length n.
        column_names: One name per column of `x`.
        standardized: Whether every column of `x` has mean 0 and sum of squares n.
        column_means: Column means of the raw data (zeros for raw datasets).
        column_scales: Root-mean-square of the centered raw columns (ones for raw datasets).
        response_name: Name of the response column.
    """

    x: np.ndarray
    y: np.ndarray
    column_names: tuple[str, ...]
    standardized: bool = False
    column_means: np.ndarray | None = None
    column_scales: np.ndarray | None = None
    response_name: str = "y"

    def __post_init__(self) -> None:
        """Validate and freeze the arrays.

        Raises:
            InputError: If the dataset violates a structural invariant.
        """
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y)
        if x.ndim != 2:
            raise InputError(f"x must be a matrix, got {x.ndim} dimension(s)", "data_model", "Dataset")
        n, p = x.shape
        if n < 2 or p < 1:
            raise InputError(
                f"a dataset needs n >= 2 rows and p >= 1 columns, got n={n}, p={p}", "data_model", "Dataset"
            )
        if y.shape != (n,):
            raise InputError(f"y must have length {n}, got shape {y.shape}", "data_model", "Dataset")
        if not np.all(np.isfinite(x)):
            raise InputError("x contains non-finite values", "data_model", "Dataset")
        if not np.all((y == 0) | (y == 1)):
            raise InputError("non-binary response: values must be 0 or 1", "data_model", "Dataset")
        names = tuple(str(name) for name in self.column_names)
        if len(names) != p:
            raise InputError(f"expected {p} column names, got {len(names)}", "data_model", "Dataset")
        if len(set(names)) != p:
            raise InputError("column names must be unique", "data_model", "Dataset")

        means = np.zeros(p) if self.column_means is None else np.asarray(self.column_means, dtype=float)
        scales = np.ones(p) if self.column_scales is None else np.asarray(self.column_scales, dtype=float)
        if means.shape != (p,) or scales.shape != (p,):
            raise InputError("column means and scales must have one entry per column", "data_model", "Dataset")
        if np.any(scales <= 0):
            raise InputError("column scales must be positive", "data_model", "Dataset")

        object.__setattr__(self, "x", _readonly(x))
        object.__setattr__(self, "y", _readonly(y, dtype=np.int8))
        object.__setattr__(self, "column_names", names)
        object.__setattr__(self, "column_means", _readonly(means))
        object.__setattr__(self, "column_scales", _readonly(scales))

    @property
    def n(self) -> int:
        """Number of observations."""
        return self.x.shape[0]

    @property
    def p(self) -> int:
        """Number of columns."""
        return self.x.shape[1]

    @cached_property
    def checksum(self) -> str:
        """SHA-256 digest of x, y and the column names."""
        return array_checksum(self.x, self.y, names=self.column_names)

    def raw_x(self) -> np.ndarray:
        """Return the design matrix on the raw scale, using the recorded column means and scales."""
        return self.x * self.column_scales + self.column_means

    @cached_property
    def binary_columns(self) -> np.ndarray:
        """Boolean mask of columns whose raw values are all 0 or 1."""
        raw = np.round(self.raw_x(), 12)
        return np.all((raw == 0) | (raw == 1), axis=0)

    def require_standardized(self, function: str) -> None:
        """Check that the dataset is standardized.

        Args:
            function: Name of the calling function, used in the error message.

        Raises:
            InputError: If the dataset is not standardized.
        """
        if not self.standardized:
            raise InputError("the dataset must be standardized first", "data_model", function)

    def take(self, rows: Sequence[int] | np.ndarray) -> Dataset:
        """Return a raw (unstandardized) dataset with a subset of the rows.

        Args:
            rows: Row indices.

        Returns:
            A new unstandardized dataset holding the raw values of the selected rows.
        """
        rows = np.asarray(rows, dtype=int)
        return Dataset(self.raw_x()[rows], self.y[rows], self.column_names, response_name=self.response_name)

    def transform(self, x_raw: np.ndarray) -> np.ndarray:
        """Apply this dataset's standardization map to raw rows.

        Args:
            x_raw: Raw rows with p columns.

        Returns:
            The rows on this dataset's scale.
        """
        return (np.asarray(x_raw, dtype=float) - self.column_means) / self.column_scales


def load_csv(path: str | Path, response_column: str) -> Dataset:
    """Read a dataset from a CSV file with a header row.

    Every column other than the response becomes a column of x, in header order.

    Args:
        path: Path to a UTF-8 CSV file.
        response_column: Name of the binary response column.

    Returns:
        An unstandardized dataset.

    Raises:
        InputError: If the file is missing or malformed, the response is missing or non-binary, a cell is not
            numeric, or a column is constant.
    """
    path = Path(path)
    if not path.is_file():
        raise InputError(f"file not found: {path}", "data_model", "load_csv")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8", skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise InputError(f"{path} is empty", "data_model", "load_csv") from None
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise InputError(f"could not parse {path}: {e}", "data_model", "load_csv") from None

    if response_column not in frame.columns:
        raise InputError(f"missing response column {response_column!r}", "data_model", "load_csv")

    values = {}
    for column in frame.columns:
        numeric = pd.to_numeric(frame[column].str.strip(), errors="coerce").to_numpy(dtype=float, na_value=np.nan)
        bad = ~np.isfinite(numeric)
        if bad.any():
            row = int(np.flatnonzero(bad)[0])
            cell = frame[column].iloc[row]
            # Row numbers count data rows from 1, excluding the header
            raise InputError(
                f"non-numeric value {cell!r} at row {row + 1}, column {column!r}", "data_model", "load_csv"
            )
        values[column] = numeric

    y = values.pop(response_column)
    if not np.all((y == 0) | (y == 1)):
        raise InputError(f"non-binary response in column {response_column!r}", "data_model", "load_csv")
    if not values:
        raise InputError("the dataset has no predictor columns", "data_model", "load_csv")
    for column, column_values in values.items():
        if np.ptp(column_values) == 0:
            raise InputError(f"constant column {column}", "data_model", "load_csv")

    logger.info("Read %d rows and %d predictor columns from %s", len(y), len(values), path)
    return Dataset(
        x=np.column_stack(list(values.values())),
        y=y.astype(np.int8),
        column_names=tuple(values),
        response_name=response_column,
    )


def standardize(d: Dataset) -> Dataset:
    """Center every column and scale it so that its sum of squares equals n.

    The response is left untouched. Means and scales are recorded so the raw values can be recovered.

    Args:
        d: An unstandardized dataset.

    Returns:
        The standardized dataset.

    Raises:
        InputError: If the dataset is already standardized or a column has zero variance.
    """
    if d.standardized:
        raise InputError("the dataset is already standardized", "data_model", "standardize")
    x = d.x
    means = x.mean(axis=0)
    centered = x - means
    scales = np.sqrt(np.mean(centered**2, axis=0))
    degenerate = scales <= 1e-12 * (1.0 + np.abs(means))
    if degenerate.any():
        name = d.column_names[int(np.flatnonzero(degenerate)[0])]
        raise InputError(f"constant column {name}", "data_model", "standardize")

    # Compose with any earlier affine map so raw values stay recoverable
    result = Dataset(
        x=centered / scales,
        y=d.y,
        column_names=d.column_names,
        standardized=True,
        column_means=d.column_means + d.column_scales * means,
        column_scales=d.column_scales * scales,
        response_name=d.response_name,
    )
    _check_standardization(result)
    return result


def destandardize(d: Dataset) -> Dataset:
    """Undo `standardize`, returning the dataset on its raw scale.

    Args:
        d: A standardized dataset.

    Returns:
        An unstandardized dataset with the raw values.
    """
    d.require_standardized("destandardize")
    return Dataset(d.raw_x(), d.y, d.column_names, response_name=d.response_name)


def _check_standardization(d: Dataset) -> None:
    max_mean = float(np.max(np.abs(d.x.mean(axis=0))))
    max_scale_error = float(np.max(np.abs(np.sum(d.x**2, axis=0) - d.n))) / d.n
    if max_mean >= MEAN_TOL or max_scale_error >= SCALE_RTOL:
        logger.warning(
            "Standardization is inexact: max |mean| = %.3g, max relative sum-of-squares error = %.3g",
            max_mean,
            max_scale_error,
        )
