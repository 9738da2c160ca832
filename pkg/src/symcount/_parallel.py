"""Chunk-level parallelism shared by the enumeration and Monte Carlo kernels.

The worker count comes from ``SYMCOUNT_THREADS`` (default: all CPUs).  Results
are always returned in input order, so the thread count never changes output.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count() -> int:
    raw = os.environ.get("SYMCOUNT_THREADS")
    if raw:
        return max(1, int(raw))
    return os.cpu_count() or 1


def map_chunks(func, chunks: list) -> list:
    workers = min(thread_count(), len(chunks))
    if workers <= 1:
        return [func(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, chunks))
