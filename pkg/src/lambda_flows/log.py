"""
Logging setup for lambda-flows

Thin layer over daiquiri so every module gets its logger with the same call,
``logger = get_logger("coalescent")``.
"""

import logging
import sys
from typing import Union

import daiquiri

_ROOT = "lambda_flows"


def setup_logging(level: Union[int, str] = logging.WARNING) -> None:
    """Configures a single stderr stream output with a ``[LEVEL] name: message`` format"""
    output = daiquiri.output.Stream(
        sys.stderr,
        formatter=daiquiri.formatter.ColorFormatter(
            fmt="[%(levelname)s] %(name)s: %(message)s"
        ),
    )
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
    daiquiri.setup(level=level, outputs=[output])


def get_logger(name: str) -> logging.LoggerAdapter:
    """Returns the library logger for a module"""
    return daiquiri.getLogger(f"{_ROOT}.{name}")
