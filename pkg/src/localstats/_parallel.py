"""Chunked evaluation with an ordered, deterministic reduction."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

THREADS_ENV = "LOCALSTATS_THREADS"


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def map_chunks(func: Callable[[np.ndarray], np.ndarray], xs: np.ndarray, chunk: int = 65536) -> np.ndarray:
    """Apply ``func`` to consecutive slices of ``xs`` and concatenate in input order.

    Results do not depend on the worker count: each element is computed by
    exactly the same code path, and slices are joined in order.
    """
    xs = np.asarray(xs)
    if xs.size <= chunk:
        return func(xs)
    slices = [xs[i:i + chunk] for i in range(0, xs.size, chunk)]
    workers = thread_count()
    if workers == 1:
        parts = [func(s) for s in slices]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(func, slices))
    return np.concatenate(parts)
