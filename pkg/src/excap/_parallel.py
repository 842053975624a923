"""Worker-count handling shared by the parallel entry points."""

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count(requested=None):
    """Number of worker threads: ``requested`` capped by ``EXCAP_THREADS``."""
    cap = os.environ.get("EXCAP_THREADS")
    n = requested if requested is not None else (int(cap) if cap else 1)
    if cap:
        n = min(n, int(cap))
    return max(1, int(n))


def ordered_map(fn, items, workers=None):
    """``list(map(fn, items))``, optionally on a thread pool; order is preserved."""
    items = list(items)
    n = worker_count(workers)
    if n == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
