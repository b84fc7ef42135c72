"""
Thread pool helpers for data-parallel numeric work
"""
import logging
import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, List, Optional, Sequence, TypeVar

from qsplit.core import settings

logger = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')

_threads_override: Optional[int] = None


def set_threads(count: Optional[int]):
    """Override the worker count for this process (None restores the default)"""
    global _threads_override
    if count is not None and count < 1:
        raise ValueError(f"thread count must be positive, got {count}")
    _threads_override = count


def worker_count() -> int:
    """--threads, then QSPLIT_THREADS, then the CPU count"""
    if _threads_override:
        return _threads_override
    if settings.THREADS and settings.THREADS > 0:
        return settings.THREADS
    return os.cpu_count() or 1


def parallel_map(func: Callable[[T], R], items: Sequence[T], max_workers: int = None) -> List[R]:
    """
    Apply func to every item, preserving input order in the result.
    numpy releases the GIL inside the heavy kernels, so threads scale.
    """
    max_workers = max_workers or worker_count()
    if max_workers == 1 or len(items) <= 1:
        return [func(item) for item in items]

    results: List[Optional[R]] = [None] * len(items)
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        future_to_index = {executor.submit(func, item): i for i, item in enumerate(items)}
        for future in as_completed(future_to_index):
            index = future_to_index[future]
            try:
                results[index] = future.result()
            except Exception as e:
                logger.error(f"Worker task {index} failed: {e}")
                raise
    return results
