"""Logging configuration for the carbon/water scheduler.

Log records go to standard error; standard output stays free for anything a
command prints as data.
"""

import logging
import sys
from typing import Any, MutableMapping, Optional

from .errors import CarbonWaterError

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


class ColoredFormatter(logging.Formatter):
    """Formatter that colors the level name with ANSI codes."""

    COLORS = {
        "DEBUG": "\033[36m",
        "INFO": "\033[32m",
        "WARNING": "\033[33m",
        "ERROR": "\033[31m",
        "CRITICAL": "\033[35m",
    }
    RESET = "\033[0m"
    BOLD = "\033[1m"

    def format(self, record: logging.LogRecord) -> str:
        plain = record.levelname
        color = self.COLORS.get(plain)
        if color:
            record.levelname = f"{color}{self.BOLD}{plain}{self.RESET}"
        try:
            return super().format(record)
        finally:
            # Later handlers must see the plain level name
            record.levelname = plain


def setup_logging(verbose: bool = False, use_colors: bool = True) -> None:
    """Configure the root logger with a single standard-error handler.

    Args:
        verbose: Enable DEBUG level logging if True, otherwise INFO level
        use_colors: Use colored output if standard error is a terminal

    Logging Levels:
        ERROR: Input errors and simulation failures
        WARNING: Dropped jobs, relaxed rounds, oracle fallbacks
        INFO: Progress milestones (load, run, compare, write)
        DEBUG: Per-round scheduling decisions and solver status
    """
    level = logging.DEBUG if verbose else logging.INFO

    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    root_logger.handlers.clear()

    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(level)
    formatter_cls = ColoredFormatter if use_colors and sys.stderr.isatty() else logging.Formatter
    handler.setFormatter(formatter_cls(fmt=LOG_FORMAT, datefmt=DATE_FORMAT))
    root_logger.addHandler(handler)


def get_logger(name: str) -> logging.Logger:
    """Get a logger instance for a module (usually ``__name__``)."""
    return logging.getLogger(name)


class PolicyLogger(logging.LoggerAdapter):
    """Prefixes every message with the policy a simulation runs."""

    def process(self, msg: Any, kwargs: MutableMapping[str, Any]) -> tuple[Any, MutableMapping[str, Any]]:
        return f"{self.extra['policy']}: {msg}", kwargs


def policy_logger(logger: logging.Logger, policy: str) -> PolicyLogger:
    return PolicyLogger(logger, {"policy": policy})


def log_error_with_details(
    logger: logging.Logger,
    error: Exception,
    context: Optional[dict] = None,
) -> None:
    """Log an error at ERROR level.

    Domain errors carry their tag and structured details in the record;
    anything else is logged with its traceback.

    Args:
        logger: Logger instance
        error: Exception to log
        context: Where the error happened (e.g. the command stage)
    """
    if isinstance(error, CarbonWaterError):
        logger.error(
            str(error),
            extra={
                "error_type": error.error_type,
                "error_details": error.details,
                "context": context or {},
            },
        )
    else:
        logger.error(str(error), extra={"context": context or {}}, exc_info=error)


def log_progress(
    logger: logging.Logger,
    stage: str,
    details: Optional[dict] = None,
) -> None:
    """Log a progress milestone as ``Progress: <stage> (key=value, ...)``."""
    msg = f"Progress: {stage}"
    if details:
        detail_str = ", ".join(f"{k}={v}" for k, v in details.items())
        msg = f"{msg} ({detail_str})"

    logger.info(msg)
