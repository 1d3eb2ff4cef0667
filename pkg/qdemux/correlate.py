"""Coincidence histograms of time-tag streams."""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from os import PathLike, fspath
from typing import Any

import numpy as np
import numpy.typing as npt

from .errors import DataError, ParameterError
from .kernels import correlate_chunk
from .timetags import TimeTagStream
from .utils import PS, to_ps

logger = logging.getLogger(__name__)

#: Marker on the first line of a histogram table.
MAGIC = 'qdemux-histogram'

#: Tags of the first stream handled by one correlation task.
CHUNK_TAGS = 1 << 18


@dataclass(frozen=True)
class CoincidenceHistogram:
    """
    Binned delays ``t_b - t_a`` between two tag streams.

    Bin ``k`` is centered on ``min_delay + (k + 1/2) * bin_width``; the
    centers of a histogram built by :func:`cross_correlate` are the integer
    multiples of the bin width, so the histogram is symmetric about zero.

    Attributes
    ----------
    bin_width : float
        Bin width in seconds.
    min_delay : float
        Lower edge of the first bin in seconds.
    max_delay : float
        Upper edge of the last bin in seconds.
    counts : NDArray[int64]
        Pair counts per bin.
    total_pairs : int
        Number of pairs in the histogram.
    """

    bin_width: float
    min_delay: float
    max_delay: float
    counts: npt.NDArray[np.int64] = field(repr=False)
    total_pairs: int = 0

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=np.int64)
        if self.bin_width <= 0:
            raise ParameterError(
                f"Invalid histogram: 'bin_width' must be > 0, "
                f'got {self.bin_width}'
            )
        expected = (self.max_delay - self.min_delay) / self.bin_width
        if counts.ndim != 1 or abs(counts.size - expected) > 1e-6:
            raise DataError(
                f'Invalid histogram: {counts.size} bins do not span '
                f'[{self.min_delay}, {self.max_delay}) at {self.bin_width}'
            )
        if np.any(counts < 0):
            raise DataError('Invalid histogram: negative counts')
        object.__setattr__(self, 'counts', counts)

    def __len__(self) -> int:
        return int(self.counts.size)

    def __add__(self, other: object) -> CoincidenceHistogram:
        if not isinstance(other, CoincidenceHistogram):
            return NotImplemented
        if (len(self), self.bin_width, self.min_delay) != \
                (len(other), other.bin_width, other.min_delay):
            raise DataError('Cannot add histograms with different bins')
        return CoincidenceHistogram(
            self.bin_width, self.min_delay, self.max_delay,
            self.counts + other.counts,
            self.total_pairs + other.total_pairs,
        )

    @property
    def delays(self) -> npt.NDArray[np.float64]:
        """`NDArray[float64]` : The bin centers in seconds."""
        return self.min_delay \
            + (np.arange(len(self)) + 0.5) * self.bin_width

    def area(self, center: float, window: float) -> int:
        """
        Sum the bins whose centers lie in ``[center - window/2,
        center + window/2)``.

        Raises
        ------
        DataError
            If the window is not covered by the histogram.
        """
        low, high = center - window / 2.0, center + window / 2.0
        if low < self.min_delay - 1e-15 or high > self.max_delay + 1e-15:
            raise DataError(
                f'Histogram [{self.min_delay:.4g}, {self.max_delay:.4g}) '
                f'does not cover the window at {center:.4g} s'
            )
        # compare on a bin-width grid to avoid float edge flicker
        pos = (self.delays - center) / self.bin_width
        half = window / (2.0 * self.bin_width)
        mask = (pos >= -half - 1e-9) & (pos < half - 1e-9)
        return int(self.counts[mask].sum())

    def mirrored(self) -> CoincidenceHistogram:
        """Return the histogram of the reversed delays ``t_a - t_b``."""
        return CoincidenceHistogram(
            self.bin_width, -self.max_delay, -self.min_delay,
            self.counts[::-1].copy(), self.total_pairs,
        )

    def to_table(self, target: str | PathLike[str],
                 provenance: dict[str, Any] | None = None) -> None:
        """Write the histogram as ``delay_ps counts`` rows."""
        header = {'bin_width': self.bin_width, 'min_delay': self.min_delay,
                  'max_delay': self.max_delay,
                  'total_pairs': self.total_pairs, **(provenance or {})}
        rows = np.column_stack([
            np.rint(self.delays * PS).astype(np.int64), self.counts,
        ])
        np.savetxt(fspath(target), rows, fmt='%d', header=(
            f'{MAGIC} {json.dumps(header, sort_keys=True)}\n'
            'delay_ps counts'
        ))

    @classmethod
    def read(cls, source: str | PathLike[str]) -> CoincidenceHistogram:
        """
        Read a histogram written by :meth:`to_table`.

        Raises
        ------
        DataError
            If the file is missing or malformed.
        """
        source = fspath(source)
        try:
            with open(source, 'r') as f:
                first = f.readline()
            if not first.startswith(f'# {MAGIC} '):
                raise DataError(f"Not a histogram file: '{source}'")
            header = json.loads(first[len(MAGIC) + 3:])
            rows = np.loadtxt(source, dtype=np.int64, ndmin=2)
        except (OSError, ValueError) as e:
            raise DataError(f"Cannot read histogram '{source}': {e}") from e
        return cls(header['bin_width'], header['min_delay'],
                   header['max_delay'], rows[:, 1], header['total_pairs'])


def _tags(stream: TimeTagStream | npt.ArrayLike) -> npt.NDArray[np.int64]:
    if isinstance(stream, TimeTagStream):
        return stream.tags
    tags = np.ascontiguousarray(stream, dtype=np.int64)
    if tags.size > 1 and np.any(np.diff(tags) < 0):
        raise DataError('Cannot correlate: tags are not sorted')
    return tags


def _same_stream(a: TimeTagStream | npt.ArrayLike,
                 b: TimeTagStream | npt.ArrayLike,
                 ta: npt.NDArray[np.int64],
                 tb: npt.NDArray[np.int64]) -> bool:
    if a is b:
        return True
    if isinstance(a, TimeTagStream) and isinstance(b, TimeTagStream) \
            and a.channel != b.channel:
        return False
    return bool(np.array_equal(ta, tb))


def cross_correlate(a: TimeTagStream | npt.ArrayLike,
                    b: TimeTagStream | npt.ArrayLike,
                    bin_width: float = 50e-12, span: float = 100e-9, *,
                    threads: int = 1) -> CoincidenceHistogram:
    """
    Histogram the delays ``t_b - t_a`` of all pairs within ``±span``.

    A two-pointer sweep over both sorted streams, linear in the number of
    tags plus the number of pairs. Stream ``a`` is cut into chunks that
    are correlated independently and summed, so the result does not
    depend on ``threads``. Passing one stream twice, or two copies with
    equal channel and tags, computes the autocorrelation without
    self-pairs.

    Parameters
    ----------
    a, b : TimeTagStream | ArrayLike
        Sorted tags in integer picoseconds.
    bin_width : float
        Bin width in seconds, at least 1 ps.
    span : float
        Largest delay magnitude in seconds.
    threads : int
        Worker threads.

    Returns
    -------
    CoincidenceHistogram
        ``2 * round(span / bin_width) + 1`` bins centered on the multiples
        of ``bin_width``.

    Raises
    ------
    DataError
        If a stream is not sorted.
    ParameterError
        If the bin width or the span is not positive.

    Examples
    --------
    >>> h = cross_correlate([0], [100], bin_width=100e-12, span=1e-9)
    >>> h.area(100e-12, 100e-12)
    1
    """
    bin_ps = to_ps(bin_width)
    if bin_ps < 1 or not span > 0:
        raise ParameterError(
            f'Invalid correlation: bin width {bin_width} s and span {span} s '
            'must be positive'
        )
    ta, tb = _tags(a), _tags(b)
    exclude_self = _same_stream(a, b, ta, tb)
    half_bins = int(math.floor(span * PS / bin_ps + 0.5))
    n_bins = 2 * half_bins + 1
    reach = half_bins * bin_ps + bin_ps // 2
    starts = list(range(0, ta.size, CHUNK_TAGS)) or [0]

    def run(start: int) -> tuple[npt.NDArray[np.int64], int]:
        stop = min(start + CHUNK_TAGS, ta.size)
        counts = np.zeros(n_bins, dtype=np.int64)
        if start >= stop:
            return counts, 0
        first = int(np.searchsorted(tb, ta[start] - reach, side='left'))
        pairs = correlate_chunk(ta, tb, start, stop, first, half_bins,
                                bin_ps, exclude_self, counts)
        return counts, int(pairs)

    with ThreadPoolExecutor(max_workers=max(threads, 1)) as executor:
        parts = list(executor.map(run, starts))
    counts = np.sum([c for c, _ in parts], axis=0, dtype=np.int64)
    total = sum(p for _, p in parts)
    width = bin_ps / PS
    logger.info('Correlated %d x %d tags: %d pairs in %d bins',
                ta.size, tb.size, total, n_bins)
    return CoincidenceHistogram(width, -(half_bins + 0.5) * width,
                                (half_bins + 0.5) * width, counts, total)


__all__ = ['CHUNK_TAGS', 'CoincidenceHistogram', 'MAGIC', 'cross_correlate']
