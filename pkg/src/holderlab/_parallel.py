"""Thread-count control and order-preserving chunked maps.

Work is always split into the same fixed chunks; threads only change who
computes a chunk, never how results are combined.
"""

import os
from concurrent.futures import ThreadPoolExecutor

CHUNK = 1 << 18


def thread_count() -> int:
    raw = os.environ.get("HOLDERLAB_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"HOLDERLAB_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"HOLDERLAB_THREADS must be a positive integer, got {raw!r}")
    return n


def chunk_bounds(total: int, size: int = CHUNK):
    return [(lo, min(lo + size, total)) for lo in range(0, total, size)]


def ordered_map(fn, items, threads=None):
    """``[fn(x) for x in items]``, possibly computed concurrently."""
    items = list(items)
    threads = thread_count() if threads is None else threads
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
