"""Order-preserving thread pool for independent work items.

numpy FFTs and the compiled kernels release the GIL, so threads give real
speed-ups.  The worker count comes from ``IFSMAP_WORKERS`` (default 1).
Results are returned in input order, so parallelism never changes outputs.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

__all__ = ["worker_count", "parallel_map"]


def worker_count() -> int:
    raw = os.environ.get("IFSMAP_WORKERS", "1").strip()
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def parallel_map(fn, items, workers: int | None = None) -> list:
    items = list(items)
    workers = worker_count() if workers is None else max(1, workers)
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
