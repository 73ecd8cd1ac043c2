"""
Logging for the simulator.

All records go to stderr through rich so that stdout stays free for result
tables. Library modules log with ``logging.getLogger(__name__)`` under the
``src`` package; the CLI talks through the ``coldlight`` logger. Both share
the same handlers, and numerical ``warnings`` (scipy IntegrationWarning,
numpy RuntimeWarning) are captured into the log.
"""

import logging
from typing import List, Optional

from rich.console import Console
from rich.logging import RichHandler


_console = Console(stderr=True)
_logger: Optional[logging.Logger] = None

LOGGER_NAME = "coldlight"
PACKAGE_LOGGERS = ("src", "py.warnings")
FILE_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def _handlers(level: int, log_file: Optional[str]) -> List[logging.Handler]:
    console_handler = RichHandler(
        console=_console,
        show_time=True,
        show_path=False,
        markup=True,
        rich_tracebacks=True,
    )
    console_handler.setFormatter(logging.Formatter("%(message)s"))
    handlers: List[logging.Handler] = [console_handler]
    if log_file:
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setFormatter(logging.Formatter(FILE_FORMAT))
        handlers.append(file_handler)
    for handler in handlers:
        handler.setLevel(level)
    return handlers


def _set_level(level: int, name: str) -> None:
    for logger_name in (name, *PACKAGE_LOGGERS):
        target = logging.getLogger(logger_name)
        target.setLevel(level)
        for handler in target.handlers:
            handler.setLevel(level)


def setup_logger(
    name: str = LOGGER_NAME,
    level: int = logging.INFO,
    log_file: Optional[str] = None,
) -> logging.Logger:
    """
    Set up the application logger and the ``src`` package loggers.

    Calling it again only changes the level; handlers are built once.

    Args:
        name: Logger name for CLI messages
        level: Logging level
        log_file: Optional path of a plain-text log

    Returns:
        Configured logger instance
    """
    global _logger

    if _logger is not None:
        _set_level(level, _logger.name)
        return _logger

    handlers = _handlers(level, log_file)
    logging.captureWarnings(True)
    for logger_name in (name, *PACKAGE_LOGGERS):
        target = logging.getLogger(logger_name)
        target.handlers = list(handlers)
        target.propagate = False
    _logger = logging.getLogger(name)
    _set_level(level, name)
    return _logger


def get_logger() -> logging.Logger:
    """Get the application logger, setting it up on first use."""
    if _logger is None:
        return setup_logger()
    return _logger
