"""Console logging setup for the command line front end."""
import logging
import os
from typing import Optional, Union

from rich.console import Console
from rich.logging import RichHandler

ENV_LEVEL = "FLOWDECOMP_LOG_LEVEL"


def configure_logging(level: Optional[Union[str, int]] = None,
                      console: Optional[Console] = None) -> logging.Logger:
    """
    Attach a rich handler to the package logger.

    Args:
        level: Logging level; falls back to $FLOWDECOMP_LOG_LEVEL, then WARNING
        console: Console to log to (defaults to stderr)

    Returns:
        logging.Logger: The configured ``flowdecomp`` logger
    """
    if level is None:
        level = os.environ.get(ENV_LEVEL, "WARNING")
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.WARNING

    logger = logging.getLogger("flowdecomp")
    for handler in list(logger.handlers):
        if isinstance(handler, RichHandler):
            logger.removeHandler(handler)
    handler = RichHandler(console=console or Console(stderr=True),
                          show_path=False, rich_tracebacks=True)
    handler.setFormatter(logging.Formatter("%(message)s"))
    logger.addHandler(handler)
    logger.setLevel(level)
    return logger
