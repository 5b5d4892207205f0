"""Handler for log messages.

This module handles all display of log messages and error messages in knockpipe.

Modules log through loggers acquired with `get_logger()`, which are children of the "knockpipe" logger. The
`KnockpipeLogHandler` attaches its handlers to that logger once per CLI run.

# Exceptions and Error Handling

The numerical modules do not log errors themselves but raise `KnockpipeErrorMessage` exceptions. These are caught in
the `__main__` module and passed to `KnockpipeLogHandler.handle_exception()`, which records them. `stop()` then
prints one machine-parsable line per error to stderr and returns the exit code.
"""

from __future__ import annotations

import logging
import time
from collections import defaultdict
from datetime import timedelta
from pathlib import Path
from typing import Any

from pythonjsonlogger import jsonlogger
from rich.logging import RichHandler
from rich.traceback import Traceback

from knockpipe.core.console import err_console
from knockpipe.core.misc import KnockpipeErrorMessage
from knockpipe.core.paths import paths

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_FORMAT_DEBUG = "%(asctime)s - %(name)s (%(process)d) - %(levelname)s - %(message)s"
TIME_FORMAT = "%H:%M:%S"
LOG_LEVELS = ("debug", "info", "warning", "error", "critical")


class LogLevelCounterHandler(logging.Handler):
    """Handler that counts the number of log messages per log level."""

    def __init__(self, count_dict: dict[str, int], *args: Any, **kwargs: Any) -> None:
        """Initialize handler.

        Args:
            count_dict: Dictionary to store the count of log messages per log level.
            args: Additional arguments.
            kwargs: Additional keyword arguments.
        """
        super().__init__(*args, **kwargs)
        self.levelcount = count_dict

    def emit(self, record: logging.LogRecord) -> None:
        """Increment level counter for each log message."""
        self.levelcount[record.levelname] += 1


class FileHandlerWithDirCreation(logging.FileHandler):
    """FileHandler which creates necessary directories when the first log message is handled."""

    def emit(self, record: logging.LogRecord) -> None:
        """Emit a record and create necessary directories if needed."""
        if self.stream is None:
            Path(self.baseFilename).parent.mkdir(parents=True, exist_ok=True)
        super().emit(record)


class ModifiedRichHandler(RichHandler):
    """RichHandler modified to print logger names instead of paths."""

    def emit(self, record: logging.LogRecord) -> None:
        """Replace path with name and call parent method."""
        record.pathname = record.name.removeprefix("knockpipe.modules.")
        record.lineno = 0
        super().emit(record)


class KnockpipeLogHandler:
    """Main log handler for knockpipe."""

    def __init__(
        self,
        log_level: str = "warning",
        log_file_level: str | None = None,
        json: bool = False,
        out_dir: str | Path | None = None,
    ) -> None:
        """Initialize log handler and attach handlers to the "knockpipe" logger.

        Args:
            log_level: Log level for logging to stderr.
            log_file_level: Log level for logging to file. No log file is written if None.
            json: Set to True to enable JSON output.
            out_dir: Output directory; the log file is placed in its `logs` subdirectory.
        """
        self.log_level = log_level
        self.log_file_level = log_file_level
        self.json = json
        self.log_filename: Path | None = None
        self.log_levelcount: dict[str, int] = defaultdict(int)
        self.messages: dict[str, list] = {"error": [], "unhandled_error": []}
        self.exit_code = 0
        self.start_time = time.time()
        self.finished = False
        self.logger = logging.getLogger("knockpipe")
        self._handlers: list[logging.Handler] = []
        self.setup_loggers(out_dir)

    def setup_loggers(self, out_dir: str | Path | None) -> None:
        """Set up log handlers for logging to stderr and log file.

        Args:
            out_dir: Output directory for the log file.
        """
        levels = [getattr(logging, self.log_level.upper()), logging.WARNING]
        if self.log_file_level:
            levels.append(getattr(logging, self.log_file_level.upper()))
        # Never higher than warning, since warnings are always counted
        self.logger.setLevel(min(levels))
        self.logger.propagate = False

        # stderr logger
        if self.json:
            stream_handler = logging.StreamHandler()
            stream_formatter = json_formatter = jsonlogger.JsonFormatter(
                LOG_FORMAT_DEBUG, rename_fields={"asctime": "time", "levelname": "level"}
            )
        else:
            stream_handler = ModifiedRichHandler(enable_link_path=False, rich_tracebacks=True, console=err_console)
            stream_formatter = logging.Formatter("%(message)s", datefmt=TIME_FORMAT)
        stream_handler.setLevel(self.log_level.upper())
        stream_handler.setFormatter(stream_formatter)
        self._add_handler(stream_handler)

        # File logger
        if self.log_file_level:
            self.log_filename = Path(out_dir or Path.cwd()) / paths.log_dir / paths.log_file
            file_handler = FileHandlerWithDirCreation(self.log_filename, mode="w", encoding="UTF-8", delay=True)
            file_handler.setLevel(self.log_file_level.upper())
            if self.json:
                file_handler.setFormatter(json_formatter)
            else:
                file_handler.setFormatter(
                    logging.Formatter(LOG_FORMAT if file_handler.level > logging.DEBUG else LOG_FORMAT_DEBUG)
                )
            self._add_handler(file_handler)

        # Level counter
        levelcount_handler = LogLevelCounterHandler(self.log_levelcount)
        levelcount_handler.setLevel(logging.WARNING)
        self._add_handler(levelcount_handler)

    def _add_handler(self, handler: logging.Handler) -> None:
        self.logger.addHandler(handler)
        self._handlers.append(handler)

    def handle_exception(self, exception: BaseException) -> None:
        """Handle exceptions raised while running a command.

        Args:
            exception: The exception to handle.
        """
        if isinstance(exception, KnockpipeErrorMessage):
            self.messages["error"].append(exception)
            self.exit_code = max(self.exit_code, exception.exit_code)
        else:
            self.messages["unhandled_error"].append(exception)
            self.exit_code = max(self.exit_code, 1)

    def stop(self) -> int:
        """Print any collected error messages, detach the handlers and return the exit code.

        Returns:
            0 on success, otherwise the exit code of the most severe error.
        """
        if self.finished:
            return self.exit_code
        self.finished = True

        for error in self.messages["error"]:
            if self.json:
                self.logger.error(error.message, extra={"source": error.source, "exit_code": error.exit_code})
            err_console.print(error.one_line(), markup=False, highlight=False, soft_wrap=True)
        for exception in self.messages["unhandled_error"]:
            err_console.print(
                Traceback.from_exception(type(exception), exception, exception.__traceback__, show_locals=False)
            )
            err_console.print(f"error: {type(exception).__name__}: {exception}", markup=False, highlight=False)

        elapsed = round(time.time() - self.start_time)
        self.logger.info("Finished in %s", timedelta(seconds=elapsed))
        if self.log_levelcount:
            counts = sorted(self.log_levelcount.items())
            self.logger.debug("Logged %s", ", ".join(f"{count} {level.lower()}" for level, count in counts))

        for handler in self._handlers:
            self.logger.removeHandler(handler)
            handler.close()
        return self.exit_code
