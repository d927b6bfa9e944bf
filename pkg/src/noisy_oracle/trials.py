"""Trial fan-out.  Results are always returned in trial-index order."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

T = TypeVar("T")


def worker_count() -> int:
    """``NOISY_ORACLE_THREADS`` if set, else the CPU count."""
    cap = os.environ.get("NOISY_ORACLE_THREADS")
    if cap:
        return max(1, int(cap))
    return os.cpu_count() or 1


def map_trials(fn: Callable[[int], T], trials: int) -> list[T]:
    workers = worker_count()
    if workers <= 1 or trials <= 1:
        return [fn(i) for i in range(trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(trials)))
