"""Deterministic data-parallel helpers.

Work is split into contiguous blocks handed to a thread pool. Each item is
computed by exactly the same per-item code regardless of the block it lands
in, so results are bitwise identical for any worker count. The SSMRPE_THREADS
environment variable caps the pool size.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

from .errors import ConfigError

THREADS_ENV_VAR = "SSMRPE_THREADS"


def resolve_workers(workers=None) -> int:
    """Effective worker count: requested (or cpu count), capped by the env var."""
    cap = None
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is not None:
        try:
            cap = int(raw)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV_VAR} must be an integer, got {raw!r}") from None
        if cap < 1:
            raise ConfigError(f"{THREADS_ENV_VAR} must be >= 1, got {cap}")
    if workers is None:
        workers = os.cpu_count() or 1
    elif workers < 1:
        raise ConfigError(f"worker count must be >= 1, got {workers}")
    if cap is not None:
        workers = min(workers, cap)
    return workers


def map_blocks(fn, n_items: int, workers=None) -> None:
    """Run ``fn(start, stop)`` over a contiguous partition of range(n_items).

    ``fn`` must write its results into preallocated storage owned per item;
    blocks never overlap. With one worker everything runs inline.
    """
    workers = resolve_workers(workers)
    if n_items <= 0:
        return
    workers = min(workers, n_items)
    if workers == 1:
        fn(0, n_items)
        return
    step = (n_items + workers - 1) // workers
    spans = [(start, min(start + step, n_items)) for start in range(0, n_items, step)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, start, stop) for start, stop in spans]
        for fut in futures:
            fut.result()
