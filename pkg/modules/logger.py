"""
Logging configuration and utilities for the relay secrecy solver.

Console logging goes to stderr: stdout is reserved for solution reports
and CSV tables.
"""

import logging
import sys
import time
from typing import Optional


class ColoredFormatter(logging.Formatter):
    """Custom formatter with colors for terminal output"""

    COLORS = {
        "DEBUG": "\033[36m",  # Cyan
        "INFO": "\033[32m",  # Green
        "WARNING": "\033[33m",  # Yellow
        "ERROR": "\033[31m",  # Red
        "CRITICAL": "\033[35m",  # Magenta
    }
    RESET = "\033[0m"

    def format(self, record):
        levelname = record.levelname
        if hasattr(sys.stderr, "isatty") and sys.stderr.isatty():
            if levelname in self.COLORS:
                record.levelname = f"{self.COLORS[levelname]}{levelname}{self.RESET}"
        try:
            return super().format(record)
        finally:
            record.levelname = levelname


def setup_logging(
    level: str = "INFO", log_file: Optional[str] = None, quiet: bool = False
):
    """
    Configure logging for the application

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Optional file path to write logs to
        quiet: If True, suppress console output (errors only)
    """
    numeric_level = getattr(logging, level.upper(), logging.INFO)

    root_logger = logging.getLogger()
    root_logger.handlers.clear()
    root_logger.setLevel(logging.DEBUG if log_file else numeric_level)

    console_handler = logging.StreamHandler(sys.stderr)
    if quiet:
        console_handler.setLevel(logging.ERROR)
        console_handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    else:
        console_handler.setLevel(numeric_level)
        console_handler.setFormatter(ColoredFormatter("%(levelname)s: %(message)s"))
    root_logger.addHandler(console_handler)

    # File handler always records solver internals at DEBUG
    if log_file:
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setLevel(logging.DEBUG)
        file_formatter = logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        )
        file_handler.setFormatter(file_formatter)
        root_logger.addHandler(file_handler)


def get_logger(name: str) -> logging.Logger:
    """
    Get a logger instance for a module

    Args:
        name: Module name (typically __name__)

    Returns:
        Logger instance
    """
    return logging.getLogger(name)


class ProgressBar:
    """
    Progress of a sweep or an oracle check on stderr.

    Solver runs take seconds per item, so the bar shows elapsed time, an
    estimate of the time left and how many items failed. Drawing is off when
    stderr is not a terminal unless forced with ``enabled=True``.
    """

    def __init__(self, total: int, description: str = "", width: int = 30,
                 enabled: Optional[bool] = None):
        self.total = total
        self.current = 0
        self.failed = 0
        self.description = description
        self.width = width
        if enabled is None:
            enabled = hasattr(sys.stderr, "isatty") and sys.stderr.isatty()
        self.enabled = enabled
        self._started = time.monotonic()
        self._drawn = 0

    @staticmethod
    def _clock(seconds: float) -> str:
        minutes, seconds = divmod(int(seconds), 60)
        return f"{minutes:d}:{seconds:02d}"

    def render(self, status: str = "") -> str:
        """Current bar as a single line (no carriage return)."""
        done = self.current / self.total if self.total > 0 else 1.0
        cells = round(self.width * done)
        elapsed = time.monotonic() - self._started
        if 0 < self.current < self.total:
            eta = f" eta {self._clock(elapsed * (self.total - self.current) / self.current)}"
        else:
            eta = ""
        failed = f" {self.failed} failed" if self.failed else ""
        line = (
            f"{self.description} [{'#' * cells}{'.' * (self.width - cells)}] "
            f"{self.current}/{self.total} {self._clock(elapsed)}{eta}{failed}"
        )
        return f"{line} {status[:30]}" if status else line

    def update(self, n: int = 1, status: str = "", failed: bool = False):
        """Count n finished items; failed marks them as errors."""
        self.current = min(self.current + n, self.total)
        if failed:
            self.failed += n
        if not self.enabled:
            return

        line = self.render(status)
        sys.stderr.write("\r" + line.ljust(self._drawn))
        self._drawn = len(line)
        if self.current >= self.total:
            sys.stderr.write("\n")
        sys.stderr.flush()

    def finish(self):
        if self.current < self.total:
            self.update(self.total - self.current)
