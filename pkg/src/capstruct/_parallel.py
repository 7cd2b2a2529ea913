"""Thread-pool helpers honouring the CAPSTRUCT_THREADS environment cap."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

_ENV_VAR = "CAPSTRUCT_THREADS"


def worker_count(requested: int | None = None) -> int:
    """Number of worker threads to use, capped by CAPSTRUCT_THREADS."""
    cap = os.environ.get(_ENV_VAR)
    limit = os.cpu_count() or 1
    if cap is not None:
        try:
            limit = max(1, int(cap))
        except ValueError:
            raise ValueError(f"{_ENV_VAR} must be an integer, got {cap!r}") from None
    if requested is not None:
        limit = min(limit, max(1, requested))
    return limit


def parallel_map(fn: Callable[[T], R], items: Sequence[T] | Iterable[T]) -> list[R]:
    """Map ``fn`` over ``items`` preserving order.

    Runs serially when only one worker is allowed, so results are
    deterministic regardless of the thread cap.
    """
    items = list(items)
    n = worker_count(len(items))
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
