"""Rate and loss budget of active, passive and hybrid demultiplexing."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, replace
from enum import Enum
from typing import Any

from .errors import ParameterError
from .utils import check_positive, check_probability

logger = logging.getLogger(__name__)

#: Minimum photon spacing in exciton lifetimes.
LIFETIME_MARGIN = 5.0


class LimitingFactor(str, Enum):
    """What bounds the photon clock."""

    REP_RATE = 'rep-rate'
    EOM_RATE = 'eom-rate'
    LIFETIME = 'lifetime'


@dataclass(frozen=True)
class DemuxScheme:
    """
    A demultiplexed n-photon source.

    Attributes
    ----------
    n_modes : int
        Number of output modes.
    rep_rate : float
        Photon clock requested from the source, in Hz.
    source_efficiency : float
        Probability of a photon per shot.
    eom_loss_db : float
        Insertion loss per EOM traversal in dB.
    eom_max_rate : float
        Fastest switching rate of an EOM in Hz.
    passive_doubling : bool
        Whether the first split is done by polarization-selective
        excitation instead of an EOM.
    t1_x : float
        Exciton lifetime in seconds.
    """

    n_modes: int = 2
    rep_rate: float = 80e6
    source_efficiency: float = 1.0
    eom_loss_db: float = 3.0
    eom_max_rate: float = 1e9
    passive_doubling: bool = False
    t1_x: float = 175e-12

    def __post_init__(self) -> None:
        if self.n_modes < 1:
            raise ParameterError(
                f"Invalid scheme: 'n_modes' must be >= 1, got {self.n_modes}"
            )
        check_positive('rep_rate', self.rep_rate)
        check_positive('eom_max_rate', self.eom_max_rate)
        check_positive('eom_loss_db', self.eom_loss_db, strict=False)
        check_positive('t1_x', self.t1_x)
        check_probability('source_efficiency', self.source_efficiency)

    @property
    def eom_depth(self) -> int:
        """`int` : EOM layers a photon traverses."""
        depth = math.ceil(math.log2(self.n_modes))
        return max(depth - 1, 0) if self.passive_doubling else depth

    @property
    def eom_count(self) -> int:
        """`int` : EOMs of the binary switching tree."""
        if self.passive_doubling:
            return max(self.n_modes - 2, 0)
        return self.n_modes - 1


@dataclass(frozen=True)
class BudgetReport:
    """
    Rate of an n-fold coincidence and the figures behind it.

    Attributes
    ----------
    rate : float
        n-fold coincidence rate in Hz.
    limiting_factor : LimitingFactor
        What bounds the photon clock.
    clock : float
        Effective photon clock in Hz.
    per_mode_efficiency : float
        Probability that a shot reaches its mode.
    eom_depth : int
        EOMs traversed per photon.
    eom_count : int
        EOMs in the tree.
    first_eom_rate : float
        Switching rate the first EOM needs, 0 without EOMs.
    """

    rate: float
    limiting_factor: LimitingFactor
    clock: float
    per_mode_efficiency: float
    eom_depth: int
    eom_count: int
    first_eom_rate: float

    def to_dict(self) -> dict[str, Any]:
        """Return a JSON-serializable representation."""
        data = asdict(self)
        data['limiting_factor'] = self.limiting_factor.value
        return data


def multiphoton_rate(s: DemuxScheme) -> BudgetReport:
    """
    Evaluate the n-fold coincidence rate of a demultiplexing scheme.

    The first EOM of the tree switches at half the photon clock, or at a
    quarter when the first split is passive, so the clock is bounded by
    the EOM speed as well as by the requested rate and by one photon per
    five exciton lifetimes. Each photon loses ``eom_loss_db`` per EOM it
    traverses, and the n-fold rate is ``clock / n * efficiency ** n``.

    Parameters
    ----------
    s : DemuxScheme
        The scheme.

    Returns
    -------
    BudgetReport
        The rate and its limiting factor.

    Examples
    --------
    >>> multiphoton_rate(DemuxScheme(n_modes=2, passive_doubling=True)
    ...                  ).eom_count
    0
    """
    depth = s.eom_depth
    divider = 4.0 if s.passive_doubling else 2.0
    ceilings = [(s.rep_rate, LimitingFactor.REP_RATE),
                (1.0 / (LIFETIME_MARGIN * s.t1_x), LimitingFactor.LIFETIME)]
    if depth > 0:
        ceilings.append((divider * s.eom_max_rate, LimitingFactor.EOM_RATE))
    clock, factor = min(ceilings, key=lambda c: c[0])
    if factor is not LimitingFactor.REP_RATE:
        logger.warning('Photon clock %.4g Hz bounded by %s, not the requested '
                       '%.4g Hz', clock, factor.value, s.rep_rate)
    efficiency = s.source_efficiency * 10.0 ** (-depth * s.eom_loss_db / 10)
    rate = clock / s.n_modes * efficiency ** s.n_modes
    return BudgetReport(
        rate=rate,
        limiting_factor=factor,
        clock=clock,
        per_mode_efficiency=efficiency,
        eom_depth=depth,
        eom_count=s.eom_count,
        first_eom_rate=clock / divider if depth > 0 else 0.0,
    )


def budget_sweep(scheme: DemuxScheme,
                 n_max: int) -> list[dict[str, Any]]:
    """
    Tabulate active and passive-hybrid rates for ``1..n_max`` modes.

    Returns
    -------
    list[dict[str, Any]]
        One row per mode count with the rate, EOM count and first-EOM
        rate of both schemes.
    """
    rows = []
    for n in range(1, n_max + 1):
        active = multiphoton_rate(
            replace(scheme, n_modes=n, passive_doubling=False)
        )
        passive = multiphoton_rate(
            replace(scheme, n_modes=n, passive_doubling=True)
        )
        rows.append({
            'n_modes': n,
            'active_rate': active.rate,
            'active_eoms': active.eom_count,
            'active_first_eom_rate': active.first_eom_rate,
            'passive_rate': passive.rate,
            'passive_eoms': passive.eom_count,
            'passive_first_eom_rate': passive.first_eom_rate,
        })
    return rows


__all__ = [
    'BudgetReport',
    'DemuxScheme',
    'LIFETIME_MARGIN',
    'LimitingFactor',
    'budget_sweep',
    'multiphoton_rate',
]
