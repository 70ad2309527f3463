# -*- coding: utf-8 -*-
"""
core.logger

Standard logger for the toolkit. Every module logs through the loguru
instance exported here.
"""

import sys
from datetime import datetime
from typing import Optional

from loguru import logger as _logger

from core.config import LOGS_ROOT

_file_level = "DEBUG"


def define_log_level(print_level: Optional[str] = None, logfile_level: str = "DEBUG", name: str = None):
    """
    Configure Loguru logger.
    print_level: console log threshold, None keeps the console quiet
    logfile_level: file log threshold
    name: optional prefix for log filename
    """
    global _file_level
    _file_level = logfile_level

    LOGS_ROOT.mkdir(parents=True, exist_ok=True)
    timestamp = datetime.now().strftime("%Y%m%d%H%M%S")
    log_name = f"{name}_{timestamp}" if name else timestamp
    log_path = LOGS_ROOT / f"{log_name}.log"

    # Remove all sinks
    _logger.remove()

    if print_level:
        _logger.add(
            sys.stderr,
            level=print_level,
            format="<green>{time:HH:mm:ss}</green> | <level>{level: <7}</level> | {message}",
            backtrace=False,
            diagnose=False,
        )

    _logger.add(
        log_path,
        level=_file_level,
        backtrace=True,
        diagnose=True,
        enqueue=True,
        rotation="50 MB",
        retention="14 days",
    )

    return _logger


# Create global logger with defaults
logger = define_log_level()
