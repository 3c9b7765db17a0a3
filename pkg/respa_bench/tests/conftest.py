"""Shared pytest configuration for the ResPA benchmark test suite."""

import sys
from pathlib import Path

# Add the respa_bench directory to sys.path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: directional replication checks (minutes)")
