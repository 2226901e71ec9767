"""Bounded worker pool for independent per-size tasks."""

import logging
from collections.abc import Callable, Hashable, Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

logger = logging.getLogger(__name__)

K = TypeVar("K", bound=Hashable)
V = TypeVar("V")


def bounded_map(fn: Callable[[K], V], items: Sequence[K], workers: int = 1) -> dict[K, V]:
    """Apply fn to every item with at most `workers` threads.

    Results are keyed by input, so the outcome does not depend on completion order.
    The first exception raised by any task propagates.
    """
    if workers <= 1 or len(items) <= 1:
        return {item: fn(item) for item in items}
    logger.debug(f"Running {len(items)} tasks on {workers} workers")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {item: pool.submit(fn, item) for item in items}
        return {item: futures[item].result() for item in items}
