"""Deterministic index-parallel evaluation.

Each index is written to its own slot by exactly one task and every stream is
derived from the index, so results are identical for any worker count; the
reduction happens afterwards in index order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np


def indexed_map(n: int, fn: Callable[[int], float], workers: int = 1) -> np.ndarray:
    """Fill out[i] = fn(i) for i in range(n), optionally across threads."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    out = np.empty(n)
    if workers <= 1 or n <= 1:
        for i in range(n):
            out[i] = fn(i)
        return out
    chunk = math.ceil(n / workers)

    def run(start: int):
        for i in range(start, min(start + chunk, n)):
            out[i] = fn(i)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(run, range(0, n, chunk)))
    return out
