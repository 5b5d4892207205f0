"""Utility functions for testing knockpipe with pytest."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pandas as pd
from scipy.special import expit

import knockpipe
from knockpipe.core.io import file_checksum
from knockpipe.modules.data_model import Dataset, standardize


def make_dataset(
    n: int = 200,
    p: int = 10,
    signal: dict[int, float] | None = None,
    seed: int = 0,
    binary_columns: tuple[int, ...] = (),
) -> Dataset:
    """Create a standardized synthetic dataset with a logistic response.

    Args:
        n: Number of observations.
        p: Number of columns.
        signal: Mapping from 0-based column index to coefficient on the standardized scale.
        seed: Seed of the data.
        binary_columns: Columns replaced by Bernoulli(1/2) indicators.

    Returns:
        The standardized dataset.
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, p))
    for j in binary_columns:
        x[:, j] = rng.integers(0, 2, size=n)
        x[0, j], x[1, j] = 0, 1
    beta = np.zeros(p)
    for j, value in (signal or {}).items():
        beta[j] = value
    x_std = (x - x.mean(axis=0)) / x.std(axis=0)
    y = (rng.random(n) < expit(x_std @ beta)).astype(int)
    y[0], y[1] = 0, 1
    return standardize(Dataset(x, y, tuple(f"x{j + 1}" for j in range(p))))


def write_csv(path: Path, d: Dataset, response: str = "y") -> Path:
    """Write a dataset on its raw scale as a CSV file with the response as the last column.

    Args:
        path: Output file.
        d: The dataset.
        response: Name of the response column.

    Returns:
        The path written.
    """
    frame = pd.DataFrame(d.raw_x(), columns=list(d.column_names))
    frame[response] = d.y.astype(int)
    frame.to_csv(path, index=False, float_format="%.17g")
    return path


def run_knockpipe(*args: str | Path) -> tuple[int, list[str]]:
    """Run the command line interface in a subprocess.

    Args:
        *args: Command line arguments.

    Returns:
        Tuple (exit code, combined stdout and stderr lines).
    """
    process = knockpipe.call([str(arg) for arg in args])
    return_code = process.wait()
    return return_code, process.output


def checksums(directory: Path) -> dict[str, str]:
    """Return the checksum of every file in a directory tree, keyed by relative path, skipping log files."""
    return {
        str(path.relative_to(directory)): file_checksum(path)
        for path in sorted(directory.rglob("*"))
        if path.is_file() and "logs" not in path.parts
    }
