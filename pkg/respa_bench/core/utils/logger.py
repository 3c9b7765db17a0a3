#!/usr/bin/env python3
"""
Logger Utility for the ResPA Benchmark

Simple logging utility for consistent logging across the application.
"""

import logging
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import List, Optional

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logger(level: str = "INFO", log_file: Optional[Path] = None,
                 max_file_size_mb: int = 10, backup_count: int = 5, console_output: bool = True) -> None:
    """
    Setup logging configuration

    Args:
        level: Root log level name (DEBUG, INFO, WARNING, ERROR)
        log_file: Optional file receiving a rotating copy of the log
        max_file_size_mb: Rotation threshold for the log file
        backup_count: Number of rotated files to keep
        console_output: Also log to stdout
    """
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stdout)] if console_output else []
    if log_file is not None:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(RotatingFileHandler(
            log_file,
            maxBytes=max_file_size_mb * 1024 * 1024,
            backupCount=backup_count,
            encoding='utf-8',
        ))
    if not handlers:
        handlers.append(logging.NullHandler())
    logging.basicConfig(
        level=getattr(logging, level.upper()),
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )


def progress_enabled(show_progress: bool = True) -> bool:
    """Progress bars only make sense when INFO output is visible"""
    return show_progress and logging.getLogger().isEnabledFor(logging.INFO)
