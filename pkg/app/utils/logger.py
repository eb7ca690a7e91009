import logging
import os
import sys
from functools import lru_cache

from rich.console import Console
from rich.logging import RichHandler

console = Console(color_system="256", width=200, style="green", stderr=True)


@lru_cache(maxsize=None)
def get_logger(module):
    # The level comes straight from the environment: config.py logs while
    # Settings is still being built.
    if "pytest" not in sys.modules:
        logger = logging.getLogger(module)
        logger.setLevel(os.environ.get("JAMGAME_LOG_LEVEL", "INFO").upper())
    else:
        logger = logging.getLogger()

    logger.propagate = True
    if not logger.handlers:
        rich_handler = RichHandler(console=console, rich_tracebacks=True)
        logger.addHandler(rich_handler)
    return logger
