"""Miscellaneous classes and methods."""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np


class KnockpipeErrorMessage(Exception):  # noqa: N818
    """Exception used to notify users of errors in a friendly way without displaying a traceback."""

    exit_code = 1

    def __init__(self, message: str, module: str = "", function: str = "") -> None:
        """Raise an error and notify the user of the problem in a friendly way.

        The CLI catches this exception, prints the message as a single line and exits with `exit_code`.

        Args:
            message: User-friendly error message to display.
            module: The name of the module where the error occurred (optional).
            function: The name of the function where the error occurred (optional).
        """
        self.message = message
        self.module = module
        self.function = function
        super().__init__(message)

    @property
    def source(self) -> str:
        """Return 'module:function' if known, otherwise an empty string."""
        if self.module and self.function:
            return f"{self.module}:{self.function}"
        return self.module or self.function

    def one_line(self) -> str:
        """Format the error as a single machine-parsable line.

        Returns:
            The error message prefixed by its source, with newlines flattened.
        """
        text = " ".join(self.message.split())
        return f"error[{self.source}]: {text}" if self.source else f"error: {text}"


class InputError(KnockpipeErrorMessage):
    """Invalid input data, configuration or arguments."""

    exit_code = 2


class ComputationError(KnockpipeErrorMessage):
    """A numerical procedure failed."""

    exit_code = 1


class ConvergenceError(ComputationError):
    """An iterative solver did not converge."""


class SeparationError(ComputationError):
    """The maximum likelihood estimate does not exist because the classes are separable."""

    def __init__(self, message: str, norm: float, module: str = "", function: str = "") -> None:
        """Initialize the error.

        Args:
            message: Error message.
            norm: Euclidean norm of the diverging coefficient vector at the point of detection.
            module: Module name.
            function: Function name.
        """
        self.norm = norm
        super().__init__(message, module, function)


class NotPositiveDefiniteError(ComputationError):
    """A matrix that must be positive definite is not."""


def get_logger(name: str) -> logging.Logger:
    """Get a logger that is a child of 'knockpipe.modules'.

    Logging in knockpipe modules should always be done using the logger returned by this function.

    Args:
        name: The name of the current module (usually `__name__`).

    Returns:
        Logger object.
    """
    if name.startswith("knockpipe.modules"):
        return logging.getLogger(name)
    if name.startswith("knockpipe."):
        name = name.removeprefix("knockpipe.")
    return logging.getLogger(f"knockpipe.modules.{name}")


def parse_index_list(value: str | Sequence[int], p: int) -> tuple[int, ...]:
    """Parse a list of 1-based column numbers into sorted, unique 0-based indices.

    Args:
        value: Comma-separated string like "1,4,7" or a sequence of 1-based integers. An empty string means no
            columns.
        p: Number of columns available.

    Returns:
        Sorted tuple of 0-based indices.

    Raises:
        InputError: If an entry is not an integer or is out of range.
    """
    if isinstance(value, str):
        parts = [part.strip() for part in value.split(",") if part.strip()]
        try:
            numbers = [int(part) for part in parts]
        except ValueError:
            raise InputError(f"invalid column list {value!r}", "misc", "parse_index_list") from None
    else:
        numbers = [int(v) for v in value]
    for number in numbers:
        if not 1 <= number <= p:
            raise InputError(
                f"index out of range: {number} (dataset has {p} columns)", "misc", "parse_index_list"
            )
    return tuple(sorted({number - 1 for number in numbers}))


def spawn_seeds(seed: int | Sequence[int], count: int) -> list[int]:
    """Derive independent integer seeds from a parent seed.

    Child i depends only on the parent seed and i, so asking for more children never changes the earlier ones.

    Args:
        seed: Parent seed, an integer or a sequence of integers (e.g. `[base_seed, replicate]`).
        count: Number of child seeds.

    Returns:
        List of 32-bit integer seeds.
    """
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(child.generate_state(1, dtype=np.uint32)[0]) for child in children]
