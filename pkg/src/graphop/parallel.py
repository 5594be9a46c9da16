"""Order-preserving parallel map used for per-graph work."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor


def map_ordered(fn, items, workers: int = 1) -> list:
    """``[fn(x) for x in items]``, optionally spread over worker processes.

    Results come back in input order, so output never depends on ``workers``.
    ``fn`` must be a picklable top-level function when ``workers > 1``.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(min(workers, len(items))) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))
