"""Replica-level fan-out that returns results in replica order."""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterable
from concurrent.futures import ProcessPoolExecutor
from typing import TypeVar

LOGGER = logging.getLogger("mallows_lab.harness")

T = TypeVar("T")


def map_replicas(fn: Callable[[int], T], replicas: Iterable[int], workers: int = 1) -> list[T]:
    """Evaluate ``fn`` on every replica index.

    ``fn`` must be picklable when ``workers > 1`` (a module-level function or a
    ``functools.partial`` of one). Output order never depends on ``workers``.
    """
    replicas = list(replicas)
    if workers <= 1 or len(replicas) <= 1:
        return [fn(r) for r in replicas]
    chunksize = max(1, len(replicas) // (workers * 4))
    LOGGER.debug("Dispatching %s replicas to %s workers (chunksize %s).", len(replicas), workers, chunksize)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, replicas, chunksize=chunksize))
