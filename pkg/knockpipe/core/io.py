"""Reading and writing of knockpipe output files.

All writers produce byte-identical files for identical inputs: floats are written with 17 significant digits,
JSON keys are sorted and lines end with a single newline.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections.abc import Iterable, Mapping
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from knockpipe.core.misc import InputError, get_logger

logger = get_logger(__name__)

FLOAT_FORMAT = "%.17g"


def format_float(value: float) -> str:
    """Format a float so that it can be read back exactly.

    Args:
        value: Value to format.

    Returns:
        The formatted value; non-finite values become 'inf', '-inf' or 'nan'.
    """
    return format(float(value), ".17g")


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays, tuples and sets into plain JSON-compatible values.

    Non-finite floats are not valid JSON and are written as the strings 'inf', '-inf' and 'nan'.

    Args:
        value: Value to convert.

    Returns:
        The converted value.
    """
    if isinstance(value, Mapping):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return [to_jsonable(v) for v in sorted(value)]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else format_float(value)
    return value


def from_json_float(value: float | str | None) -> float | None:
    """Read back a float written by `to_jsonable`.

    Args:
        value: A number, one of the strings 'inf', '-inf' and 'nan', or None.

    Returns:
        The float value, or None.
    """
    return None if value is None else float(value)


def write_json(path: str | Path, data: Any) -> Path:
    """Write data as pretty-printed JSON with sorted keys.

    Args:
        path: Output file.
        data: Data to write.

    Returns:
        The path written.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(to_jsonable(data), indent=2, sort_keys=True, ensure_ascii=False)
    path.write_text(text + "\n", encoding="utf-8")
    logger.debug("Wrote %s", path)
    return path


def read_json(path: str | Path) -> Any:
    """Read a JSON file.

    Args:
        path: File to read.

    Returns:
        The parsed JSON data.

    Raises:
        InputError: If the file is missing or is not valid JSON.
    """
    try:
        with Path(path).open(encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise InputError(f"file not found: {path}", "io", "read_json") from None
    except json.JSONDecodeError as e:
        raise InputError(f"invalid JSON in {path}: {e}", "io", "read_json") from None


def write_table(path: str | Path, table: pd.DataFrame) -> Path:
    """Write a data frame as CSV without index.

    Args:
        path: Output file.
        table: Data to write.

    Returns:
        The path written.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="nan", lineterminator="\n", encoding="utf-8")
    logger.debug("Wrote %s", path)
    return path


def write_matrix(path: str | Path, matrix: np.ndarray, column_names: Iterable[str]) -> Path:
    """Write a numeric matrix as CSV with a header row.

    Args:
        path: Output file.
        matrix: 2-D array.
        column_names: One name per column.

    Returns:
        The path written.
    """
    return write_table(path, pd.DataFrame(np.asarray(matrix, dtype=float), columns=list(column_names)))


def write_text(path: str | Path, text: str) -> Path:
    """Write a text file, making sure it ends with a single newline.

    Args:
        path: Output file.
        text: Text to write.

    Returns:
        The path written.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text.rstrip("\n") + "\n", encoding="utf-8")
    logger.debug("Wrote %s", path)
    return path


def file_checksum(path: str | Path) -> str:
    """Return the SHA-256 hex digest of a file.

    Args:
        path: File to hash.

    Returns:
        Hex digest.
    """
    digest = hashlib.sha256()
    with Path(path).open("rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def array_checksum(*arrays: np.ndarray, names: Iterable[str] = ()) -> str:
    """Return a SHA-256 hex digest over the contents of numpy arrays and optional names.

    Args:
        *arrays: Arrays to hash; shapes and dtypes are included.
        names: Optional strings (e.g. column names) to include.

    Returns:
        Hex digest.
    """
    digest = hashlib.sha256()
    for array in arrays:
        array = np.ascontiguousarray(array)
        digest.update(f"{array.dtype.str}{array.shape}".encode())
        digest.update(array.tobytes())
    for name in names:
        digest.update(name.encode("utf-8") + b"\0")
    return digest.hexdigest()
