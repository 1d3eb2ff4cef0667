"""Excitation timeline of the pulse-pair protocol."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Iterator

import numpy as np
import numpy.typing as npt

from .errors import ConfigError
from .model import Polarization

logger = logging.getLogger(__name__)

#: Minimum ratio of pair delay to exciton lifetime before warning.
REEXCITATION_MARGIN = 5.0


class SequenceWarning(UserWarning):
    """Warning issued for a pulse pair too close for the exciton to decay."""


@dataclass(frozen=True)
class ExcitationCycle:
    """
    One TPE + stim pulse pair.

    Attributes
    ----------
    tpe_time : float
        Arrival of the TPE pulse in seconds.
    stim_time : float
        Arrival of the stim pulse in seconds.
    stim_pol : Polarization
        Polarization of the stim pulse (and of the branch it selects).
    cycle_index : int
        Position in the sequence.
    stim_enabled : bool
        Whether the stim pulse of this branch is switched on.
    """

    tpe_time: float
    stim_time: float
    stim_pol: Polarization
    cycle_index: int
    stim_enabled: bool = True


@dataclass(frozen=True)
class SequenceConfig:
    """
    Pulse-pair schedule.

    Attributes
    ----------
    rep_period : float
        Laser repetition period in seconds.
    pair_delay : float
        Delay of the second pulse pair within a period, in seconds.
    stim_delay : float
        Delay δt of each stim pulse after its TPE pulse, in seconds.
    n_periods : int
        Number of laser periods.
    stim_enabled_h : bool
        Whether the H-polarized stim pulse is on.
    stim_enabled_v : bool
        Whether the V-polarized stim pulse is on.
    first : Polarization
        Polarization of the first pair in each period.
    """

    rep_period: float = 12.5e-9
    pair_delay: float = 2e-9
    stim_delay: float = 6e-12
    n_periods: int = 1
    stim_enabled_h: bool = True
    stim_enabled_v: bool = True
    first: Polarization = Polarization.V

    def __post_init__(self) -> None:
        issues = []
        if not math.isfinite(self.rep_period) or self.rep_period <= 0:
            issues.append(f'rep_period: must be > 0, got {self.rep_period}')
        elif not 0 < self.pair_delay < self.rep_period:
            issues.append('pair_delay: must lie in (0, rep_period), '
                          f'got {self.pair_delay}')
        if not math.isfinite(self.stim_delay):
            issues.append(f'stim_delay: must be finite, got {self.stim_delay}')
        if self.n_periods < 1:
            issues.append(f'n_periods: must be >= 1, got {self.n_periods}')
        if issues:
            raise ConfigError('Invalid pulse sequence', issues)

    def stim_enabled(self, pol: Polarization) -> bool:
        """Return whether the stim pulse of a branch is on."""
        return self.stim_enabled_h if pol == Polarization.H \
            else self.stim_enabled_v


@dataclass(frozen=True)
class ExcitationSchedule:
    """
    Column-oriented form of a list of :class:`ExcitationCycle`.

    Attributes
    ----------
    tpe_time : NDArray[float64]
        TPE arrival times in seconds.
    stim_time : NDArray[float64]
        Stim arrival times in seconds.
    stim_pol : NDArray[int8]
        Stim polarizations.
    stim_enabled : NDArray[bool_]
        Stim switches.
    cycle_index : NDArray[int64]
        Cycle positions.
    """

    tpe_time: npt.NDArray[np.float64]
    stim_time: npt.NDArray[np.float64]
    stim_pol: npt.NDArray[np.int8]
    stim_enabled: npt.NDArray[np.bool_]
    cycle_index: npt.NDArray[np.int64]

    def __len__(self) -> int:
        return len(self.tpe_time)

    def __iter__(self) -> Iterator[ExcitationCycle]:
        for i in range(len(self)):
            yield ExcitationCycle(
                tpe_time=float(self.tpe_time[i]),
                stim_time=float(self.stim_time[i]),
                stim_pol=Polarization(int(self.stim_pol[i])),
                cycle_index=int(self.cycle_index[i]),
                stim_enabled=bool(self.stim_enabled[i]),
            )

    def __getitem__(self, key: slice) -> ExcitationSchedule:
        return ExcitationSchedule(
            tpe_time=self.tpe_time[key],
            stim_time=self.stim_time[key],
            stim_pol=self.stim_pol[key],
            stim_enabled=self.stim_enabled[key],
            cycle_index=self.cycle_index[key],
        )

    @classmethod
    def from_cycles(cls, cycles: list[ExcitationCycle]
                    ) -> ExcitationSchedule:
        """Build a schedule from individual cycles."""
        return cls(
            tpe_time=np.array([c.tpe_time for c in cycles], dtype=float),
            stim_time=np.array([c.stim_time for c in cycles], dtype=float),
            stim_pol=np.array([c.stim_pol for c in cycles], dtype=np.int8),
            stim_enabled=np.array([c.stim_enabled for c in cycles],
                                  dtype=bool),
            cycle_index=np.array([c.cycle_index for c in cycles],
                                 dtype=np.int64),
        )


def build_schedule(cfg: SequenceConfig,
                   t1_x: float | None = None) -> ExcitationSchedule:
    """
    Build the excitation timeline as arrays.

    Parameters
    ----------
    cfg : SequenceConfig
        The schedule.
    t1_x : float | None
        Exciton lifetime; a :class:`SequenceWarning` is issued when the
        pair delay is shorter than five lifetimes.

    Returns
    -------
    ExcitationSchedule
        ``2 * cfg.n_periods`` cycles sorted by TPE time.
    """
    if t1_x is not None and cfg.pair_delay < REEXCITATION_MARGIN * t1_x:
        message = (f'Pair delay {cfg.pair_delay:.3g} s is shorter than '
                   f'{REEXCITATION_MARGIN:g} exciton lifetimes '
                   f'({t1_x:.3g} s); expect re-excitation overlap')
        logger.warning(message)
        warnings.warn(message, SequenceWarning, stacklevel=2)

    period = np.arange(cfg.n_periods, dtype=np.int64)
    start = period.astype(float) * cfg.rep_period
    tpe = np.empty(2 * cfg.n_periods)
    tpe[0::2] = start
    tpe[1::2] = start + cfg.pair_delay

    first = cfg.first
    pol = np.empty(2 * cfg.n_periods, dtype=np.int8)
    pol[0::2] = first
    pol[1::2] = first.orthogonal()
    enabled = np.where(pol == Polarization.H, cfg.stim_enabled_h,
                       cfg.stim_enabled_v)

    return ExcitationSchedule(
        tpe_time=tpe,
        stim_time=tpe + cfg.stim_delay,
        stim_pol=pol,
        stim_enabled=enabled,
        cycle_index=np.arange(2 * cfg.n_periods, dtype=np.int64),
    )


def build_sequence(cfg: SequenceConfig,
                   t1_x: float | None = None) -> list[ExcitationCycle]:
    """
    Build the ordered list of excitation cycles.

    Period ``k`` holds the pair of ``cfg.first`` polarization at
    ``k * rep_period`` and the orthogonal pair ``pair_delay`` later.

    Parameters
    ----------
    cfg : SequenceConfig
        The schedule.
    t1_x : float | None
        Exciton lifetime used for the re-excitation check.

    Returns
    -------
    list[ExcitationCycle]
        The cycles in strictly increasing TPE time.

    Examples
    --------
    >>> [(c.tpe_time, c.stim_pol.name) for c in build_sequence(
    ...     SequenceConfig(n_periods=1))]
    [(0.0, 'V'), (2e-09, 'H')]
    """
    return list(build_schedule(cfg, t1_x))


__all__ = [
    'ExcitationCycle',
    'ExcitationSchedule',
    'REEXCITATION_MARGIN',
    'SequenceConfig',
    'SequenceWarning',
    'build_schedule',
    'build_sequence',
]
