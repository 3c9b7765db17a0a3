#!/usr/bin/env python3
"""
Unit Tests for the Threading Framework

Tests the TaskManager ordering and failure handling.
"""

import sys
import threading
import time
from pathlib import Path

import pytest

# Add the respa_bench directory to sys.path for imports
current_dir = Path(__file__).parent
app_dir = current_dir.parent.parent
sys.path.insert(0, str(app_dir))

from core.utils.threading_utils import HISTORY_LIMIT, TaskManager, TaskStatus, create_task_manager


class TestTaskManager:
    """
    Test TaskManager functionality
    """

    def test_results_in_submission_order(self):
        def slow_for_small(n):
            time.sleep(0.01 * (5 - n))
            return n * n

        manager = TaskManager(max_workers=4)
        assert manager.map_ordered(slow_for_small, range(5)) == [0, 1, 4, 9, 16]

    def test_single_worker_runs_inline(self):
        threads = set()
        TaskManager(max_workers=1).map_ordered(lambda _: threads.add(threading.get_ident()), range(3))
        assert threads == {threading.get_ident()}

    def test_failures_recorded(self):
        def fail_on_two(n):
            if n == 2:
                raise ValueError("two")
            return n

        results = TaskManager(max_workers=2).run_ordered(fail_on_two, range(4))
        assert [r.status for r in results] == [TaskStatus.COMPLETED, TaskStatus.COMPLETED,
                                               TaskStatus.FAILED, TaskStatus.COMPLETED]
        assert isinstance(results[2].error, ValueError)
        assert results[3].data == 3

    def test_map_raises_first_failure(self):
        def fail_late(n):
            if n >= 1:
                raise KeyError(n)
            return n

        with pytest.raises(KeyError) as info:
            TaskManager(max_workers=3).map_ordered(fail_late, range(4))
        assert info.value.args == (1,)

    def test_history(self):
        manager = TaskManager()
        manager.map_ordered(str, range(3))
        history = manager.get_task_history()
        assert len(history) == 3
        assert all(r.is_success for r in history)

    def test_history_is_bounded(self):
        manager = TaskManager()
        for _ in range(3):
            manager.map_ordered(str, range(HISTORY_LIMIT))
        history = manager.get_task_history(limit=10 * HISTORY_LIMIT)
        assert len(history) == HISTORY_LIMIT
        assert [r.index for r in history] == list(range(HISTORY_LIMIT))
        assert [r.index for r in manager.get_task_history(limit=2)] == [HISTORY_LIMIT - 2, HISTORY_LIMIT - 1]

    def test_invalid_worker_count(self):
        with pytest.raises(ValueError):
            TaskManager(max_workers=0)

    def test_create_task_manager_auto_detects(self):
        manager = create_task_manager()
        assert 1 <= manager.max_workers <= 8
        assert create_task_manager(2).max_workers == 2
