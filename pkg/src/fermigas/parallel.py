"""Deterministic work distribution.

Work items are pure functions of their inputs; results are always
reduced in input order, so the numeric output is bit-identical for any
thread count.  The default thread count honors FERMIGAS_THREADS and is
overridden by explicit arguments.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

ENV_THREADS = "FERMIGAS_THREADS"


def resolve_threads(threads: int | None = None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get(ENV_THREADS)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, os.cpu_count() or 1)


def ordered_map(fn: Callable[[T], R], items: Sequence[T],
                threads: int | None = None) -> list[R]:
    """Map fn over items, returning results in input order."""
    n = resolve_threads(threads)
    items = list(items)
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))
