"""
Bounded fan-out for independent, read-only work items.

Evaluation episodes, audit episodes and diversity-grid cells all share
only immutable inputs, so they run on worker threads behind a semaphore.
Results come back in input order.
"""
from __future__ import annotations

import asyncio
from typing import Callable, Iterable, Optional, TypeVar

from teg.config import settings

T = TypeVar("T")
R = TypeVar("R")


async def _gather_bounded(fn: Callable[[T], R], items: list[T], limit: int) -> list[R]:
    semaphore = asyncio.Semaphore(limit)

    async def run_with_semaphore(item: T) -> R:
        async with semaphore:
            return await asyncio.to_thread(fn, item)

    tasks = [run_with_semaphore(item) for item in items]
    return await asyncio.gather(*tasks)


def fan_out(fn: Callable[[T], R], items: Iterable[T], limit: Optional[int] = None) -> list[R]:
    """Apply fn to every item with at most `limit` in flight (default TEG_THREADS)."""
    items = list(items)
    limit = limit or settings.threads
    if limit <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    return asyncio.run(_gather_bounded(fn, items, limit))
