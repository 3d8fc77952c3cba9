"""
Logging setup for the simulator.

Console output is colored with colorlog; a rotating plain-text log file can
be attached later (typically by the CLI once the scenario's ``logging``
section is known). Loggers are configured by name so the simulator does not
touch the root logger of host applications such as notebooks.

Example:
    >>> from src.logging_config import setup_logging
    >>> setup_logging(log_level="INFO", name="src")
    >>> setup_logging(log_level="DEBUG", name="src", log_file="logs/sim.log", max_bytes=1 << 20, backup_count=3)
"""

import logging
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional

import colorlog

CONSOLE_FORMAT = "%(asctime)s - %(name)s - %(log_color)s%(levelname)s%(reset)s - %(message)s"
FILE_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

LOG_COLORS = {
    "DEBUG": "cyan",
    "INFO": "green",
    "WARNING": "yellow",
    "ERROR": "red",
    "CRITICAL": "red,bg_white",
}


def setup_logging(
    log_level: str,
    name: str = __name__,
    log_file: Optional[str] = None,
    max_bytes: int = 0,
    backup_count: int = 0,
) -> logging.Logger:
    """
    Configure a named logger with a colored console handler and an optional log file.

    The call is idempotent: the console handler is installed once, the level is
    always updated, and a file handler is added only if none writing to the same
    path exists yet.

    Args:
        log_level: Level name (DEBUG, INFO, WARNING, ERROR, CRITICAL), case-insensitive.
            Unknown names fall back to INFO.
        name: Logger to configure. Default: this module's name.
        log_file: Optional path of a rotating log file; parent directories are created.
        max_bytes: Rotation size in bytes (0 disables rotation).
        backup_count: Number of rotated files to keep.

    Returns:
        The configured logger.
    """
    logger = logging.getLogger(name)
    level = getattr(logging, log_level.upper(), logging.INFO)
    logger.setLevel(level)
    logger.propagate = False

    has_console = any(getattr(h, "_sim_console", False) for h in logger.handlers)
    if not has_console:
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(colorlog.ColoredFormatter(CONSOLE_FORMAT, log_colors=LOG_COLORS))
        console_handler._sim_console = True  # type: ignore[attr-defined]
        logger.addHandler(console_handler)

    if log_file:
        log_file_path = Path(log_file).resolve()
        already = any(
            isinstance(h, RotatingFileHandler) and Path(h.baseFilename) == log_file_path for h in logger.handlers
        )
        if not already:
            log_file_path.parent.mkdir(parents=True, exist_ok=True)
            file_handler = RotatingFileHandler(
                log_file_path,
                maxBytes=max_bytes,
                backupCount=backup_count,
                encoding="utf-8",
            )
            file_handler.setFormatter(logging.Formatter(FILE_FORMAT))
            logger.addHandler(file_handler)
            logger.debug(f"Logging to file {log_file_path}")

    return logger
