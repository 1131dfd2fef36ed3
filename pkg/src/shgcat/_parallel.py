"""Order-preserving map over independent work items."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor


def resolve_workers(workers) -> int:
    if workers is None:
        return 1
    if workers <= 0:
        return max(1, os.cpu_count() or 1)
    return int(workers)


def parallel_map(fn, items, workers=None) -> list:
    """``list(map(fn, items))``, optionally spread over processes.

    Results come back in input order regardless of completion order, so
    parallel and serial runs produce the same output.
    """
    items = list(items)
    n = resolve_workers(workers)
    if n == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))
