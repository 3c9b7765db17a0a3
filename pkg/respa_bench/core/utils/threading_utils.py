#!/usr/bin/env python3
"""
Threading Framework for the ResPA Benchmark

Worker-pool utilities providing:
- A TaskManager running independent work items on a thread pool
- Results returned in submission order, so outputs never depend on scheduling
- Task status and timing records for every work item
- Failure propagation: the first failed item re-raises its exception

Attack runs are sequential per sample, but samples, grid rows and models are
independent, and numpy releases the GIL inside its kernels. Work items must
only read shared state (trained models are immutable); file writes stay on
the calling thread.
"""

import logging
import os
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Deque, Iterable, List, Optional, TypeVar

from tqdm import tqdm

from core.utils.logger import progress_enabled

T = TypeVar('T')
R = TypeVar('R')

# results kept for get_task_history()
HISTORY_LIMIT = 256


# ================================================================================================
# ENUMS AND DATA MODELS
# ================================================================================================

class TaskStatus(Enum):
    """Enumeration of possible task states"""
    PENDING = "pending"         # Task created but not started
    RUNNING = "running"         # Task is currently executing
    COMPLETED = "completed"     # Task finished successfully
    FAILED = "failed"           # Task failed with error


@dataclass
class TaskResult:
    """
    Result data from a completed work item

    Encapsulates:
    - Success/failure status
    - Return data from successful items
    - The exception of failed items
    - Execution timing
    """
    index: int                             # Position in the submitted sequence
    status: TaskStatus                     # Final task status
    data: Any = None                       # Result data (if successful)
    error: Optional[BaseException] = None  # Exception (if failed)
    execution_time_ms: int = 0             # Wall time of the item

    @property
    def is_success(self) -> bool:
        """Check if task completed successfully"""
        return self.status == TaskStatus.COMPLETED

    @property
    def is_failure(self) -> bool:
        """Check if task failed"""
        return self.status == TaskStatus.FAILED


def _run_item(fn: Callable[[T], R], index: int, item: T) -> TaskResult:
    started = time.perf_counter()
    try:
        data = fn(item)
        status, error = TaskStatus.COMPLETED, None
    except Exception as e:
        data, status, error = None, TaskStatus.FAILED, e
    elapsed = int((time.perf_counter() - started) * 1000)
    return TaskResult(index=index, status=status, data=data, error=error, execution_time_ms=elapsed)


# ================================================================================================
# TASK MANAGER
# ================================================================================================

class TaskManager:
    """
    Thread pool manager for independent work items

    max_workers = 1 runs everything inline on the calling thread.
    """

    def __init__(self, max_workers: int = 1, show_progress: bool = False):
        """
        Initialize task manager

        Args:
            max_workers: Maximum number of concurrent threads
            show_progress: Show a tqdm bar while items complete
        """
        if max_workers < 1:
            raise ValueError(f"max_workers must be >= 1, got {max_workers}")
        self.max_workers = max_workers
        self.show_progress = show_progress
        self._task_history: Deque[TaskResult] = deque(maxlen=HISTORY_LIMIT)
        self.logger = logging.getLogger(f"{__name__}.TaskManager")
        self.logger.debug(f"TaskManager initialized with {max_workers} max workers")

    def run_ordered(self, fn: Callable[[T], R], items: Iterable[T],
                    task_name: str = "tasks") -> List[TaskResult]:
        """
        Run fn on every item and collect TaskResults in submission order

        Failed items are recorded, not raised.
        """
        items = list(items)
        use_bar = self.show_progress and progress_enabled()
        bar = tqdm(total=len(items), desc=task_name, leave=False) if use_bar else None

        results: List[TaskResult] = []
        if self.max_workers == 1 or len(items) <= 1:
            for index, item in enumerate(items):
                results.append(_run_item(fn, index, item))
                if bar is not None:
                    bar.update(1)
        else:
            with ThreadPoolExecutor(max_workers=self.max_workers,
                                    thread_name_prefix="respa-worker") as pool:
                futures = [pool.submit(_run_item, fn, index, item) for index, item in enumerate(items)]
                for future in futures:
                    results.append(future.result())
                    if bar is not None:
                        bar.update(1)
        if bar is not None:
            bar.close()

        self._task_history.extend(results)
        failures = sum(1 for r in results if r.is_failure)
        total_ms = sum(r.execution_time_ms for r in results)
        self.logger.debug(f"{task_name}: {len(results)} items, {failures} failed, {total_ms}ms of work")
        return results

    def map_ordered(self, fn: Callable[[T], R], items: Iterable[T],
                    task_name: str = "tasks") -> List[R]:
        """
        Run fn on every item and return the values in submission order

        Raises:
            The exception of the first failed item, in submission order
        """
        results = self.run_ordered(fn, items, task_name)
        for result in results:
            if result.is_failure:
                self.logger.error(f"{task_name}: item {result.index} failed - {result.error}")
                raise result.error
        return [r.data for r in results]

    def get_task_history(self, limit: int = 50) -> List[TaskResult]:
        """Recent task results"""
        return list(self._task_history)[-limit:] if self._task_history and limit > 0 else []


def create_task_manager(max_workers: Optional[int] = None, show_progress: bool = False) -> TaskManager:
    """
    Convenience function to create task manager

    Args:
        max_workers: Maximum concurrent threads (auto-detect if None)
        show_progress: Show progress bars

    Returns:
        TaskManager: Configured task manager
    """
    if max_workers is None:
        # Auto-detect based on CPU cores (minimum 1, maximum 8)
        cpu_count = os.cpu_count() or 1
        max_workers = max(1, min(8, cpu_count))
    return TaskManager(max_workers, show_progress=show_progress)
