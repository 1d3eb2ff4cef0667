"""Compiled inner loops."""

from __future__ import annotations

import numpy as np
import numpy.typing as npt
from numba import njit


@njit(cache=True, nogil=True)  # type: ignore[misc]
def dead_time_mask(tags: npt.NDArray[np.int64],
                   dead: int) -> npt.NDArray[np.bool_]:  # pragma: no cover
    """Mark the tags a non-paralyzable detector registers."""
    keep = np.ones(tags.size, dtype=np.bool_)
    if dead <= 0:
        return keep
    last = 0
    for i in range(tags.size):
        if i > 0 and tags[i] - last < dead:
            keep[i] = False
        else:
            last = tags[i]
    return keep


@njit(cache=True, nogil=True)  # type: ignore[misc]
def correlate_chunk(a: npt.NDArray[np.int64], b: npt.NDArray[np.int64],
                    start: int, stop: int, first: int, half_bins: int,
                    bin_ps: int, exclude_self: bool,
                    counts: npt.NDArray[np.int64]) -> int:  # pragma: no cover
    """
    Histogram ``b[j] - a[i]`` for ``start <= i < stop``.

    A two-pointer sweep: ``first`` is the lowest index of ``b`` that can
    pair with ``a[start]`` and only moves forward. Delays are assigned to
    the bin centered on the nearest multiple of ``bin_ps``, ties away from
    zero, which keeps the histogram mirror-symmetric.
    """
    reach = half_bins * bin_ps + bin_ps // 2
    nb = b.size
    low = first
    pairs = 0
    for i in range(start, stop):
        ai = a[i]
        while low < nb and b[low] < ai - reach:
            low += 1
        j = low
        while j < nb and b[j] <= ai + reach:
            if not (exclude_self and j == i):
                delay = b[j] - ai
                magnitude = delay if delay >= 0 else -delay
                q = (2 * magnitude + bin_ps) // (2 * bin_ps)
                if q <= half_bins:
                    if delay >= 0:
                        counts[half_bins + q] += 1
                    else:
                        counts[half_bins - q] += 1
                    pairs += 1
            j += 1
    return pairs


__all__ = ['correlate_chunk', 'dead_time_mask']
