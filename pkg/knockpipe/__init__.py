"""Controlled variable selection for binary outcomes with Gaussian model-X knockoffs."""

from __future__ import annotations

import subprocess
import sys
from collections.abc import Generator
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from typing import Self

__version__ = "0.3.0.dev0"


class KnockpipeCall:
    """Context manager for running the knockpipe command line interface in a subprocess."""

    def __init__(self, args: list[str] | None = None) -> None:
        """Initialize the context manager.

        The subprocess is started lazily, when the context is entered or output is first requested.

        Args:
            args: List of arguments to pass to the command line interface.
        """
        self.args = args or []
        self._process: subprocess.Popen | None = None
        self._stdout_iter = None
        self._return_code: int | None = None
        self._started = False
        self.output: list[str] = []

    def _start(self) -> None:
        """Start the subprocess and prepare to stream output."""
        if self._started:
            return
        cmd = [sys.executable, "-m", "knockpipe", *self.args]
        self._process = subprocess.Popen(
            cmd,
            stdout=subprocess.PIPE,
            stderr=subprocess.STDOUT,
            text=True,
            bufsize=1,
        )
        self._stdout_iter = iter(self._process.stdout)
        self._started = True

    def __enter__(self) -> Self:
        """Enter the context and return the KnockpipeCall instance.

        Returns:
            The KnockpipeCall instance itself.
        """
        self._start()
        return self

    def __exit__(
        self, exc_type: type[BaseException] | None, exc_value: BaseException | None, traceback: object
    ) -> None:
        """Exit the context and make sure the subprocess finishes."""
        if self._process:
            self._process.wait()
            self._return_code = self._process.returncode
            self._process.stdout.close()

    def _create_output_generator(self) -> Generator[str, None, None]:
        """Create a generator yielding the combined stdout and stderr lines of the subprocess.

        Yields:
            Output lines without trailing newlines.
        """
        self._start()
        for line in self._stdout_iter:
            self.output.append(line.rstrip("\n"))
            yield self.output[-1]
        if self._process:
            self._process.wait()
            self._return_code = self._process.returncode

    def __iter__(self) -> KnockpipeCall:
        """Return the KnockpipeCall instance as an iterator."""
        self._output_generator = self._create_output_generator()
        return self

    def __next__(self) -> str:
        """Return the next output line."""
        return next(self._output_generator)

    @property
    def return_code(self) -> int:
        """Exit code of the finished subprocess.

        Raises:
            RuntimeError: If the subprocess is still running.
        """
        if self._return_code is None:
            raise RuntimeError("The subprocess is still running or has not been started.")
        return self._return_code

    def wait(self) -> int:
        """Wait for the subprocess to finish, collecting any remaining output in `output`.

        Returns:
            The exit code.
        """
        self._start()
        if self._process:
            if not self._process.stdout.closed:
                self.output.extend(self._process.stdout.read().splitlines())
            self._process.wait()
            self._return_code = self._process.returncode
        return self.return_code


def call(args: list[str] | None = None, /) -> KnockpipeCall:
    """Run the knockpipe command line interface in a subprocess.

    The arguments are the same as on the command line, e.g. `["select", "--input", "d.csv", "--response", "y"]`.
    Iterate over the returned object to read output lines, or call `wait()` to get the exit code.

    Args:
        args: List of arguments to pass to the command line interface.

    Returns:
        A context manager for managing the call.
    """
    return KnockpipeCall(args)
