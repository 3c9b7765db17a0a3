#!/usr/bin/env python3
"""
Unit Tests for Logging Setup
"""

import logging
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path

import pytest

# Add the respa_bench directory to sys.path for imports
current_dir = Path(__file__).parent
app_dir = current_dir.parent.parent
sys.path.insert(0, str(app_dir))

from core.utils.logger import progress_enabled, setup_logger


@pytest.fixture
def root_logger():
    root = logging.getLogger()
    saved = (root.level, list(root.handlers))
    yield root
    for handler in root.handlers:
        handler.close()
    root.handlers[:] = saved[1]
    root.setLevel(saved[0])


def console_handlers(root):
    return [h for h in root.handlers
            if isinstance(h, logging.StreamHandler) and not isinstance(h, RotatingFileHandler)]


class TestSetupLogger:
    """
    Handler selection from the logging settings
    """

    def test_console_by_default(self, root_logger):
        setup_logger("DEBUG")
        assert len(console_handlers(root_logger)) == 1
        assert root_logger.level == logging.DEBUG

    def test_console_output_off_with_file(self, root_logger, tmp_path):
        log_file = tmp_path / "logs" / "run.log"
        setup_logger("INFO", log_file, console_output=False)
        assert console_handlers(root_logger) == []
        assert [type(h) for h in root_logger.handlers] == [RotatingFileHandler]
        logging.getLogger("bench").info("to file only")
        for handler in root_logger.handlers:
            handler.flush()
        assert "to file only" in log_file.read_text(encoding='utf-8')

    def test_console_output_off_without_file_is_silent(self, root_logger):
        setup_logger("WARNING", console_output=False)
        assert [type(h) for h in root_logger.handlers] == [logging.NullHandler]

    def test_progress_follows_level(self, root_logger):
        setup_logger("WARNING")
        assert progress_enabled() is False
        setup_logger("INFO")
        assert progress_enabled() is True
        assert progress_enabled(False) is False
