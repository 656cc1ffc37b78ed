"""Order-preserving thread map shared by the detectors."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")

_threads = max(1, min(8, os.cpu_count() or 1))


def set_threads(n: int) -> None:
    """Cap the worker count; 1 runs everything inline."""
    global _threads
    if n < 1:
        raise ValueError("threads must be >= 1")
    _threads = int(n)


def get_threads() -> int:
    return _threads


def pmap(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """[fn(x) for x in items], evaluated on up to ``get_threads()`` threads, in input order."""
    items = list(items)
    if _threads == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(_threads, len(items))) as ex:
        return list(ex.map(fn, items))
