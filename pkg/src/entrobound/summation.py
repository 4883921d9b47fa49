"""Compensated series summation.

All partial sums in this package accumulate in increasing index order.
Chunks are reduced with numpy's pairwise summation and the chunk totals
are combined exactly with ``math.fsum``, which keeps results reproducible
to well below 1e-12 relative error without a Python-level loop.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable

import numpy as np

__all__ = ["compensated_sum", "indexed_chunk_sum", "CHUNK"]

CHUNK = 1 << 20


def compensated_sum(values: Iterable[float] | np.ndarray) -> float:
    """Sum ``values`` with compensation, preserving input order."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size <= CHUNK:
        return math.fsum(arr.tolist())
    parts = [
        float(np.sum(arr[lo : lo + CHUNK]))
        for lo in range(0, arr.size, CHUNK)
    ]
    return math.fsum(parts)


def indexed_chunk_sum(
    term: Callable[[np.ndarray], np.ndarray],
    start: int,
    stop: int,
) -> float:
    """Sum ``term(k)`` for integer k in ``[start, stop]`` without materialising
    the whole range. ``term`` receives int64 arrays and must vectorise."""
    if stop < start:
        return 0.0
    parts = []
    lo = start
    while lo <= stop:
        hi = min(lo + CHUNK - 1, stop)
        ks = np.arange(lo, hi + 1, dtype=np.int64)
        parts.append(float(np.sum(term(ks))))
        lo = hi + 1
    return math.fsum(parts)
