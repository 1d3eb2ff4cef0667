"""Time-tag streams and their file formats."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from os import PathLike, fspath
from typing import Any

import numpy as np
import numpy.typing as npt

from .errors import DataError

logger = logging.getLogger(__name__)

#: Marker on the first line of a text tag file.
MAGIC = 'qdemux-tags'


@dataclass(frozen=True)
class TimeTagStream:
    """
    Detection timestamps of one detector channel.

    Attributes
    ----------
    channel : int
        The channel number.
    tags : NDArray[int64]
        Non-decreasing timestamps in integer picoseconds.
    duration : float
        Length of the acquisition in seconds.
    """

    channel: int
    tags: npt.NDArray[np.int64] = field(repr=False)
    duration: float = 0.0

    def __post_init__(self) -> None:
        tags = np.ascontiguousarray(self.tags, dtype=np.int64)
        if tags.ndim != 1:
            raise DataError(f'Channel {self.channel}: tags must be 1-D')
        if tags.size > 1 and np.any(np.diff(tags) < 0):
            raise DataError(f'Channel {self.channel}: tags are not sorted')
        object.__setattr__(self, 'tags', tags)

    def __len__(self) -> int:
        return int(self.tags.size)

    @property
    def rate(self) -> float:
        """`float` : Mean count rate in Hz."""
        return len(self) / self.duration if self.duration > 0 else 0.0


def write_tags(target: str | PathLike[str], stream: TimeTagStream,
               provenance: dict[str, Any] | None = None) -> None:
    """
    Write a stream as a text table or a compressed binary archive.

    The format follows the suffix of ``target``: ``.npz`` is binary,
    anything else is a text table of ``channel timestamp_ps`` rows below a
    ``#``-prefixed JSON header.

    Parameters
    ----------
    target : str | PathLike
        The output path.
    stream : TimeTagStream
        The stream to write.
    provenance : dict[str, Any] | None
        Extra header entries, e.g. seed and scenario hash.
    """
    header = {'channel': stream.channel, 'duration': stream.duration,
              **(provenance or {})}
    text = json.dumps(header, sort_keys=True)
    target = fspath(target)
    if target.endswith('.npz'):
        np.savez_compressed(
            target,
            channel=np.full(len(stream), stream.channel, dtype=np.int16),
            tags=stream.tags,
            header=np.array(text),
        )
    else:
        rows = np.column_stack([
            np.full(len(stream), stream.channel, dtype=np.int64),
            stream.tags,
        ])
        np.savetxt(target, rows, fmt='%d',
                   header=f'{MAGIC} {text}\nchannel timestamp_ps')
    logger.debug('Wrote %d tags of channel %d to %s',
                 len(stream), stream.channel, target)


def read_tags(source: str | PathLike[str]
              ) -> tuple[TimeTagStream, dict[str, Any]]:
    """
    Read a stream written by :func:`write_tags`.

    Parameters
    ----------
    source : str | PathLike
        The input path.

    Returns
    -------
    tuple[TimeTagStream, dict[str, Any]]
        The stream and its header.

    Raises
    ------
    DataError
        If the file is missing, malformed or unsorted.
    """
    source = fspath(source)
    try:
        if source.endswith('.npz'):
            with np.load(source) as archive:
                header = json.loads(str(archive['header']))
                tags = archive['tags'].astype(np.int64)
        else:
            with open(source, 'r') as f:
                first = f.readline()
            if not first.startswith(f'# {MAGIC} '):
                raise DataError(f"Not a tag file: '{source}'")
            header = json.loads(first[len(MAGIC) + 3:])
            rows = np.loadtxt(source, dtype=np.int64, comments='#',
                              ndmin=2)
            tags = rows[:, 1] if rows.size else np.empty(0, np.int64)
    except (OSError, ValueError, KeyError) as e:
        raise DataError(f"Cannot read tag file '{source}': {e}") from e
    stream = TimeTagStream(int(header['channel']), tags,
                           float(header.get('duration', 0.0)))
    return stream, header


__all__ = ['MAGIC', 'TimeTagStream', 'read_tags', 'write_tags']
