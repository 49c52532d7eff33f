"""Deterministic map helper honouring the GOGTOOL_THREADS cap.

Work items are pure functions over immutable values, so a thread pool is
safe; results are returned in input order regardless of scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def thread_budget() -> int:
    raw = os.environ.get("GOGTOOL_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def pmap(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Map ``fn`` over ``items``, preserving order.

    Uses a thread pool of size GOGTOOL_THREADS (default 1 = sequential).
    """
    seq: Sequence[T] = list(items)
    workers = thread_budget()
    if workers <= 1 or len(seq) <= 1:
        return [fn(x) for x in seq]
    with ThreadPoolExecutor(max_workers=min(workers, len(seq))) as pool:
        return list(pool.map(fn, seq))
