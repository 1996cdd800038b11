"""
Centralized logging configuration for the mode-superposition toolkit.

Scans and sweeps report their progress through ``extra={...}`` fields
(grid size, displacement, output path, ...). The formatter below appends
those fields to the console line so a run can be followed without a debugger.
"""

import logging
import sys
from typing import Any

import numpy as np

# Attributes every LogRecord carries; anything else came in through ``extra``.
_STANDARD_ATTRS = frozenset(
    {
        "name",
        "msg",
        "args",
        "levelname",
        "levelno",
        "pathname",
        "filename",
        "module",
        "lineno",
        "funcName",
        "created",
        "msecs",
        "relativeCreated",
        "thread",
        "threadName",
        "processName",
        "process",
        "taskName",
        "getMessage",
        "exc_info",
        "exc_text",
        "stack_info",
        "message",
        "asctime",
    }
)


def _format_value(value: Any) -> str:
    """Render numbers compactly; complex amplitudes as re+imj."""
    if isinstance(value, complex | np.complexfloating):
        return f"{value.real:.6g}{value.imag:+.6g}j"
    if isinstance(value, float | np.floating):
        return f"{value:.6g}"
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


class ExtraFieldsFormatter(logging.Formatter):
    """
    Formatter that appends extra fields to the log line.

    ``logger.info("scan finished", extra={"steps": 81, "crossover": 0.5603})``
    becomes ``... - scan finished | steps=81 | crossover=0.5603``.
    """

    def format(self, record: logging.LogRecord) -> str:
        base_message = super().format(record)

        extra_fields = {
            key: value
            for key, value in record.__dict__.items()
            if key not in _STANDARD_ATTRS and not key.startswith("_")
        }

        if extra_fields:
            extra_str = " | ".join(
                f"{key}={_format_value(value)}" for key, value in extra_fields.items()
            )
            return f"{base_message} | {extra_str}"

        return base_message


_logging_configured = False


def setup_logging(level: int = logging.INFO, quiet: bool = False) -> None:
    """
    Set up the root logger with a single stderr handler.

    Idempotent: library modules call it at import time, the CLI calls it
    again with the user's verbosity, and only the first call installs the
    handler. Later calls still adjust the level.

    Args:
        level: The logging level to use (default: INFO)
        quiet: Raise the level to WARNING regardless of ``level``
    """
    global _logging_configured

    root_logger = logging.getLogger()
    root_logger.setLevel(max(level, logging.WARNING) if quiet else level)

    if _logging_configured:
        return

    formatter = ExtraFieldsFormatter(
        fmt="%(asctime)s - %(levelname)s - %(name)s - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)

    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    root_logger.addHandler(console_handler)

    _logging_configured = True


def get_logger(name: str) -> logging.Logger:
    """
    Get a logger instance with the given name.

    Args:
        name: The name for the logger (typically __name__)

    Returns:
        A configured logger instance
    """
    return logging.getLogger(name)
