"""Chunked work distribution with deterministic merge order."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Optional, Sequence

CHUNK = 40000


def thread_count() -> int:
    raw = os.environ.get("MULTIBORD_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def chunked(n: int, size: Optional[int] = None) -> list[tuple[int, int]]:
    size = size or CHUNK
    return [(i, min(n, i + size)) for i in range(0, n, size)] or [(0, 0)]


def pmap(fn: Callable, args: Sequence[tuple]) -> list:
    """``[fn(*a) for a in args]``, in a process pool when MULTIBORD_THREADS > 1.

    Results come back in argument order regardless of scheduling.
    """
    n = thread_count()
    if n == 1 or len(args) < 2:
        return [fn(*a) for a in args]
    with ProcessPoolExecutor(max_workers=min(n, len(args))) as pool:
        futures = [pool.submit(fn, *a) for a in args]
        return [f.result() for f in futures]
