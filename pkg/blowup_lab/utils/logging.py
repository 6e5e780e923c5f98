"""
Logging setup for the blow-up laboratory.
Routes package loggers through a rich console handler.
"""

import logging
from typing import Optional

from rich.console import Console
from rich.logging import RichHandler

PACKAGE_LOGGER = "blowup_lab"


def setup_logging(level: int = logging.INFO, console: Optional[Console] = None) -> logging.Logger:
    """
    Configure the package logger.

    Args:
        level: Logging level for the package logger.
        console: Optional rich console; stderr is used when None.

    Returns:
        The configured package logger.
    """
    logger = logging.getLogger(PACKAGE_LOGGER)
    logger.setLevel(level)

    # One handler per process, however often the CLI is dispatched
    for handler in list(logger.handlers):
        logger.removeHandler(handler)

    handler = RichHandler(
        console=console or Console(stderr=True),
        show_path=False,
        rich_tracebacks=True,
    )
    handler.setFormatter(logging.Formatter("%(message)s"))
    logger.addHandler(handler)
    logger.propagate = False

    logging.captureWarnings(True)
    return logger
