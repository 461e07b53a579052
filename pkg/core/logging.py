"""Logging configuration for the Wong-Zakai toolkit."""

import logging
import sys
from typing import Any

from .config import settings

ROOT_LOGGER = "wong_zakai"


class ColoredFormatter(logging.Formatter):
    """Custom formatter with colors for different log levels."""

    COLORS = {
        'DEBUG': '\033[36m',    # Cyan
        'INFO': '\033[32m',     # Green
        'WARNING': '\033[33m',  # Yellow
        'ERROR': '\033[31m',    # Red
        'CRITICAL': '\033[35m', # Magenta
        'RESET': '\033[0m'      # Reset
    }

    def __init__(self, fmt: str, datefmt: str, use_color: bool = True) -> None:
        super().__init__(fmt, datefmt=datefmt)
        self.use_color = use_color

    def format(self, record: Any) -> str:
        if not self.use_color:
            return super().format(record)
        log_color = self.COLORS.get(record.levelname, self.COLORS['RESET'])
        reset_color = self.COLORS['RESET']

        # Format a copy so other handlers keep the plain level name
        colored = logging.makeLogRecord(record.__dict__)
        colored.levelname = f"{log_color}{record.levelname}{reset_color}"
        return super().format(colored)


def setup_logging(level: str | None = None) -> None:
    """Configure application logging."""
    logger = logging.getLogger(ROOT_LOGGER)
    default = "DEBUG" if settings.debug else settings.log_level
    log_level = getattr(logging, (level or default).upper(), logging.INFO)
    logger.setLevel(log_level)
    logger.propagate = False

    # Remove existing handlers
    logger.handlers.clear()

    # Console handler; logs go to stderr so stdout stays clean for tables
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(log_level)

    formatter = ColoredFormatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%H:%M:%S',
        use_color=sys.stderr.isatty(),
    )
    console_handler.setFormatter(formatter)

    logger.addHandler(console_handler)


def get_logger(name: str) -> logging.Logger:
    """Get a logger instance for the given name."""
    return logging.getLogger(f"{ROOT_LOGGER}.{name}")
