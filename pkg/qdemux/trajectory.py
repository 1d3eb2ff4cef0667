"""
Monte Carlo engine turning excitation cycles into detector time tags.

Photons are handled as columns of a :class:`PhotonBatch` so that a run of
millions of cycles stays vectorized. Emission runs in fixed-size blocks of
cycles, each drawing from its own counter-derived random stream, so results
do not depend on the number of worker threads.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from enum import Enum, IntEnum
from typing import TYPE_CHECKING, Iterator, NamedTuple, Sequence

import numpy as np
import numpy.typing as npt

from .errors import ParameterError
from .kernels import dead_time_mask
from .model import (
    Polarization,
    PulseParameters,
    QdParameters,
    draw_branches,
    prepare_biexciton_probability,
    stim_efficiency,
)
from .sequence import ExcitationCycle, ExcitationSchedule, build_schedule
from .timetags import TimeTagStream
from .utils import PS, check_positive, check_probability

if TYPE_CHECKING:
    from .scenario import Scenario

logger = logging.getLogger(__name__)

#: Cycles simulated per random substream.
BLOCK_CYCLES = 1 << 15

# spawn keys of the random substreams derived from a scenario seed
STREAM_EMISSION = 0
STREAM_OPTICS = 1
STREAM_DETECTION = 2


class PhotonKind(IntEnum):
    """Origin of a photon."""

    X = 0
    XX = 1
    NOISE = 2


class HomMode(str, Enum):
    """Configuration of the unbalanced HOM interferometer."""

    CO = 'co'
    CROSS = 'cross'
    HV = 'hv'
    HV_CROSS = 'hv_cross'

    @property
    def rotates(self) -> bool:
        """`bool` : Whether the long arm flips the polarization."""
        return self in (HomMode.CROSS, HomMode.HV)

    @property
    def mixed(self) -> bool:
        """`bool` : Whether both polarization streams enter."""
        return self in (HomMode.HV, HomMode.HV_CROSS)


class PhotonRecord(NamedTuple):
    """A single emitted photon."""

    emit_time: float
    polarization: Polarization
    center_freq_offset: float
    kind: PhotonKind
    cycle_index: int
    onset_time: float


@dataclass(frozen=True)
class PhotonBatch:
    """
    Emitted photons as columns.

    Attributes
    ----------
    emit_time : NDArray[float64]
        Emission times in seconds.
    polarization : NDArray[int8]
        :class:`Polarization` values.
    center_freq_offset : NDArray[float64]
        Center-frequency offsets in Hz.
    kind : NDArray[int8]
        :class:`PhotonKind` values.
    cycle_index : NDArray[int64]
        Index of the emitting cycle.
    onset_time : NDArray[float64]
        Start of the emitting state's decay, i.e. of the wavepacket.
    """

    emit_time: npt.NDArray[np.float64]
    polarization: npt.NDArray[np.int8]
    center_freq_offset: npt.NDArray[np.float64]
    kind: npt.NDArray[np.int8]
    cycle_index: npt.NDArray[np.int64]
    onset_time: npt.NDArray[np.float64]

    def __len__(self) -> int:
        return len(self.emit_time)

    def __iter__(self) -> Iterator[PhotonRecord]:
        for i in range(len(self)):
            yield self.record(i)

    def record(self, i: int) -> PhotonRecord:
        """Return photon ``i`` as a :class:`PhotonRecord`."""
        return PhotonRecord(
            emit_time=float(self.emit_time[i]),
            polarization=Polarization(int(self.polarization[i])),
            center_freq_offset=float(self.center_freq_offset[i]),
            kind=PhotonKind(int(self.kind[i])),
            cycle_index=int(self.cycle_index[i]),
            onset_time=float(self.onset_time[i]),
        )

    def select(self, key: npt.NDArray[np.bool_] | npt.NDArray[np.intp]
               ) -> PhotonBatch:
        """Return the photons picked by a mask or an index array."""
        return PhotonBatch(**{f.name: getattr(self, f.name)[key]
                              for f in fields(self)})

    def sorted(self) -> PhotonBatch:
        """Return the photons in order of emission."""
        return self.select(np.argsort(self.emit_time, kind='stable'))

    @classmethod
    def concatenate(cls, batches: Sequence[PhotonBatch]) -> PhotonBatch:
        """Join batches, keeping their order."""
        if not batches:
            return cls.empty()
        return cls(**{f.name: np.concatenate([getattr(b, f.name)
                                              for b in batches])
                      for f in fields(cls)})

    @classmethod
    def from_records(cls, records: Sequence[PhotonRecord]) -> PhotonBatch:
        """Build a batch from individual records."""
        if not records:
            return cls.empty()
        columns = list(zip(*records))
        return cls(
            emit_time=np.array(columns[0], dtype=float),
            polarization=np.array(columns[1], dtype=np.int8),
            center_freq_offset=np.array(columns[2], dtype=float),
            kind=np.array(columns[3], dtype=np.int8),
            cycle_index=np.array(columns[4], dtype=np.int64),
            onset_time=np.array(columns[5], dtype=float),
        )

    @classmethod
    def empty(cls) -> PhotonBatch:
        """Return a batch without photons."""
        return cls(np.empty(0), np.empty(0, np.int8), np.empty(0),
                   np.empty(0, np.int8), np.empty(0, np.int64), np.empty(0))


@dataclass(frozen=True)
class DetectorModel:
    """
    A single-photon detector.

    Attributes
    ----------
    efficiency : float
        Detection probability.
    jitter_sigma : float
        Standard deviation of the Gaussian timing jitter in seconds.
    dark_rate : float
        Dark-count rate in Hz.
    dead_time : float
        Non-paralyzable dead time in seconds.
    """

    efficiency: float = 1.0
    jitter_sigma: float = 0.0
    dark_rate: float = 0.0
    dead_time: float = 0.0

    def __post_init__(self) -> None:
        check_probability('efficiency', self.efficiency)
        check_positive('jitter_sigma', self.jitter_sigma, strict=False)
        check_positive('dark_rate', self.dark_rate, strict=False)
        check_positive('dead_time', self.dead_time, strict=False)


@dataclass(frozen=True)
class BeamsplitterParams:
    """
    An imbalanced beamsplitter.

    Attributes
    ----------
    r : float
        Reflectance.
    t : float
        Transmittance.
    """

    r: float = 0.5
    t: float = 0.5

    def __post_init__(self) -> None:
        for name in ('r', 't'):
            value = getattr(self, name)
            if not math.isfinite(value) or not 0.0 < value < 1.0:
                raise ParameterError(
                    f"Invalid beamsplitter: '{name}' must be in (0, 1), "
                    f'got {value}'
                )
        if abs(self.r + self.t - 1.0) > 1e-9:
            raise ParameterError(
                f'Invalid beamsplitter: r + t must be 1, '
                f'got {self.r + self.t}'
            )


class HomOutcome(NamedTuple):
    """Result of one two-photon interference event."""

    coincidence: bool
    out1: tuple[float, ...]
    out2: tuple[float, ...]


def substream(seed: int, *key: int) -> np.random.Generator:
    """Return the random generator of a counter-derived substream."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _as_schedule(cycles: Sequence[ExcitationCycle] | ExcitationSchedule
                 ) -> ExcitationSchedule:
    if isinstance(cycles, ExcitationSchedule):
        return cycles
    return ExcitationSchedule.from_cycles(list(cycles))


def simulate_emission(cycles: Sequence[ExcitationCycle] | ExcitationSchedule,
                      qd: QdParameters, rng: np.random.Generator, *,
                      tpe_pulse: PulseParameters | None = None,
                      stim_pulse: PulseParameters | None = None,
                      keep_xx: bool = False) -> PhotonBatch:
    """
    Run the cascade for every excitation cycle.

    Parameters
    ----------
    cycles : Sequence[ExcitationCycle] | ExcitationSchedule
        The excitation cycles, sorted by TPE time.
    qd : QdParameters
        The quantum dot.
    rng : Generator
        The random source.
    tpe_pulse : PulseParameters | None
        The excitation pulse, a π pulse on resonance by default.
    stim_pulse : PulseParameters | None
        The stimulation pulse, a π pulse by default.
    keep_xx : bool
        Whether the biexciton photons are returned too.

    Returns
    -------
    PhotonBatch
        The emitted photons sorted by emission time.
    """
    schedule = _as_schedule(cycles)
    tpe_pulse = tpe_pulse or PulseParameters()
    stim_pulse = stim_pulse or PulseParameters()
    n = len(schedule)
    tpe = schedule.tpe_time

    p_prep = prepare_biexciton_probability(tpe_pulse, qd)
    delay = schedule.stim_time - tpe
    unique, inverse = np.unique(delay, return_inverse=True)
    eta = np.array([stim_efficiency(float(d), stim_pulse, qd, tpe_pulse)
                    for d in unique])[inverse.reshape(-1)] \
        if n else np.empty(0)

    prepared = rng.random(n) < p_prep
    stimulated = prepared & schedule.stim_enabled & (rng.random(n) < eta)
    spontaneous = tpe + rng.exponential(qd.t1_xx, n)
    xx_time = np.where(stimulated, np.maximum(schedule.stim_time, tpe),
                       spontaneous)
    branch = draw_branches(stimulated, schedule.stim_pol, qd, rng)
    x_time = xx_time + rng.exponential(qd.t1_x, n)

    split = np.where(branch == Polarization.H, 0.5, -0.5) * qd.fss_hz
    wander = rng.normal(0.0, qd.sigma / math.sqrt(2.0), n)
    offset = split + wander

    extra = prepared & (rng.random(n) < qd.reexcitation_prob)
    extra_time = x_time + rng.exponential(qd.t1_x, n)

    parts = [
        PhotonBatch(x_time, branch, offset,
                    np.full(n, PhotonKind.X, np.int8),
                    schedule.cycle_index, xx_time).select(prepared),
        PhotonBatch(extra_time, branch, offset,
                    np.full(n, PhotonKind.NOISE, np.int8),
                    schedule.cycle_index, x_time).select(extra),
    ]
    if keep_xx:
        parts.append(PhotonBatch(xx_time, branch, np.zeros(n),
                                 np.full(n, PhotonKind.XX, np.int8),
                                 schedule.cycle_index,
                                 tpe).select(prepared))
    logger.debug('Emitted %d cascades from %d cycles (%d stimulated)',
                 int(prepared.sum()), n, int(stimulated.sum()))
    return PhotonBatch.concatenate(parts).sorted()


def emit(schedule: ExcitationSchedule, qd: QdParameters, seed: int, *,
         tpe_pulse: PulseParameters | None = None,
         stim_pulse: PulseParameters | None = None,
         keep_xx: bool = False, threads: int = 1,
         block: int = BLOCK_CYCLES) -> PhotonBatch:
    """
    Run :func:`simulate_emission` over fixed blocks of cycles.

    Block ``k`` draws from the substream ``(seed, STREAM_EMISSION, k)``;
    the blocks are merged in order, so the output is identical for any
    number of threads.
    """
    starts = range(0, len(schedule), block)

    def run(k: int) -> PhotonBatch:
        start = starts[k]
        return simulate_emission(
            schedule[start:start + block], qd,
            substream(seed, STREAM_EMISSION, k),
            tpe_pulse=tpe_pulse, stim_pulse=stim_pulse, keep_xx=keep_xx,
        )

    with ThreadPoolExecutor(max_workers=max(threads, 1)) as executor:
        parts = list(executor.map(run, range(len(starts))))
    photons = PhotonBatch.concatenate(parts).sorted()
    logger.info('Simulated %d cycles in %d blocks: %d photons',
                len(schedule), len(parts), len(photons))
    return photons


def detect(times: npt.NDArray[np.float64], det: DetectorModel,
           rng: np.random.Generator, *, duration: float,
           channel: int) -> TimeTagStream:
    """
    Apply a detector model to photon arrival times.

    Jitter, efficiency thinning, Poissonian dark counts over ``duration``
    and dead-time filtering are applied in that order.

    Parameters
    ----------
    times : NDArray[float64]
        Arrival times in seconds.
    det : DetectorModel
        The detector.
    rng : Generator
        The random source.
    duration : float
        Length of the acquisition in seconds.
    channel : int
        The channel number of the output stream.

    Returns
    -------
    TimeTagStream
        The detected tags.
    """
    times = np.asarray(times, dtype=float)
    if det.jitter_sigma > 0:
        times = times + rng.normal(0.0, det.jitter_sigma, times.size)
    if det.efficiency < 1:
        times = times[rng.random(times.size) < det.efficiency]
    if det.dark_rate > 0:
        darks = rng.uniform(0.0, duration,
                            rng.poisson(det.dark_rate * duration))
        times = np.concatenate([times, darks])
    tags = np.sort(np.rint(times * PS).astype(np.int64))
    dead = int(round(det.dead_time * PS))
    tags = tags[dead_time_mask(tags, dead)]
    return TimeTagStream(channel, tags, duration)


def _optical(photons: PhotonBatch, keep_xx: bool = False) -> PhotonBatch:
    # the spectral filter passes the exciton line only
    if keep_xx:
        return photons
    return photons.select(photons.kind != PhotonKind.XX)


def route_polarizing(photons: PhotonBatch, det_h: DetectorModel,
                     det_v: DetectorModel, rng: np.random.Generator, *,
                     duration: float | None = None,
                     channels: tuple[int, int] = (1, 2),
                     keep_xx: bool = False
                     ) -> tuple[TimeTagStream, TimeTagStream]:
    """
    Separate the exciton photons by polarization and detect them.

    Parameters
    ----------
    photons : PhotonBatch
        Photons sorted by emission time.
    det_h, det_v : DetectorModel
        The detectors behind the H and V outputs.
    rng : Generator
        The random source.
    duration : float | None
        Length of the acquisition; the last emission time if omitted.
    channels : tuple[int, int]
        Channel numbers of the H and V streams.
    keep_xx : bool
        Whether biexciton photons pass the spectral filter.

    Returns
    -------
    tuple[TimeTagStream, TimeTagStream]
        The H and V streams.
    """
    optical = _optical(photons, keep_xx)
    if duration is None:
        duration = float(optical.emit_time.max()) if len(optical) else 0.0
    is_h = optical.polarization == Polarization.H
    stream_h = detect(optical.emit_time[is_h], det_h, rng,
                      duration=duration, channel=channels[0])
    stream_v = detect(optical.emit_time[~is_h], det_v, rng,
                      duration=duration, channel=channels[1])
    return stream_h, stream_v


def wavepacket_overlap(tau0: npt.ArrayLike, delta_nu: npt.ArrayLike,
                       t1: float, gamma: float | None = None
                       ) -> npt.NDArray[np.float64]:
    """
    Return the squared overlap of two one-sided exponential wavepackets.

    ``exp(-|tau0|/t1) * gamma / (t1 * ((2π delta_nu)² + gamma²))``, which is
    ``exp(-|tau0|/t1) / (1 + (2π delta_nu t1)²)`` for ``gamma = 1/t1``.

    Parameters
    ----------
    tau0 : ArrayLike
        Offset of the wavepacket onsets in seconds.
    delta_nu : ArrayLike
        Center-frequency difference in Hz.
    t1 : float
        Radiative lifetime in seconds.
    gamma : float | None
        Dephasing rate in Hz, ``1/t1`` by default.
    """
    gamma = 1.0 / t1 if gamma is None else gamma
    omega = 2.0 * np.pi * np.asarray(delta_nu, dtype=float)
    return np.exp(-np.abs(np.asarray(tau0, dtype=float)) / t1) \
        * gamma / (t1 * (omega ** 2 + gamma ** 2))


def interfere(overlap: npt.NDArray[np.float64], bs: BeamsplitterParams,
              rng: np.random.Generator
              ) -> tuple[npt.NDArray[np.int8], npt.NDArray[np.int8]]:
    """
    Decide the output ports of photon pairs entering opposite inputs.

    A pair leaves through different ports with probability
    ``r² + t² - 2rt·overlap``; otherwise both leave through port 0 with
    probability ``r`` and port 1 otherwise.

    Returns
    -------
    tuple[NDArray[int8], NDArray[int8]]
        Output ports of the first and second photon of each pair.
    """
    r, t = bs.r, bs.t
    p_split = r * r + t * t - 2.0 * r * t * overlap
    split = rng.random(overlap.size) < p_split
    both_reflect = rng.random(overlap.size) < r * r / (r * r + t * t)
    bunch_port = (rng.random(overlap.size) >= r).astype(np.int8)
    first = np.where(split, np.where(both_reflect, 0, 1), bunch_port)
    second = np.where(split, 1 - first, bunch_port)
    return first.astype(np.int8), second.astype(np.int8)


def hom_interfere(pair: tuple[PhotonRecord, PhotonRecord],
                  bs: BeamsplitterParams, qd: QdParameters,
                  rng: np.random.Generator, *, delay: float = 0.0,
                  distinguishable: bool = False) -> HomOutcome:
    """
    Interfere two photons on a beamsplitter.

    The first photon enters input 1 after an extra path ``delay``, the
    second enters input 2. Photons of kind ``NOISE``, or a pair marked
    ``distinguishable``, do not interfere.

    Parameters
    ----------
    pair : tuple[PhotonRecord, PhotonRecord]
        The photons.
    bs : BeamsplitterParams
        The beamsplitter.
    qd : QdParameters
        The quantum dot; ``t1_x`` and the dephasing rate set the overlap.
    rng : Generator
        The random source.
    delay : float
        Extra delay of the first photon in seconds.
    distinguishable : bool
        Force a vanishing overlap, e.g. for orthogonal polarizations.

    Returns
    -------
    HomOutcome
        The coincidence flag and the arrival times at each output.
    """
    a, b = pair
    overlap = 0.0
    if not distinguishable and a.kind == b.kind == PhotonKind.X:
        overlap = float(wavepacket_overlap(
            a.onset_time + delay - b.onset_time,
            a.center_freq_offset - b.center_freq_offset,
            qd.t1_x, qd.dephasing_rate,
        ))
    port_a, port_b = interfere(np.array([overlap]), bs, rng)
    arrivals = ((a.emit_time + delay, int(port_a[0])),
                (b.emit_time, int(port_b[0])))
    out1 = tuple(sorted(t for t, port in arrivals if port == 0))
    out2 = tuple(sorted(t for t, port in arrivals if port == 1))
    return HomOutcome(port_a[0] != port_b[0], out1, out2)


def _detect_pair(arrivals: npt.NDArray[np.float64],
                 ports: npt.NDArray[np.int8], scenario: Scenario,
                 seed: int, duration: float
                 ) -> tuple[TimeTagStream, TimeTagStream]:
    streams = []
    for port, det in enumerate(scenario.detectors):
        streams.append(detect(
            arrivals[ports == port], det,
            substream(seed, STREAM_DETECTION, port),
            duration=duration, channel=port + 1,
        ))
    return streams[0], streams[1]


def _scenario_photons(scenario: Scenario, seed: int, threads: int, *,
                      keep_xx: bool = False) -> PhotonBatch:
    schedule = build_schedule(scenario.sequence, scenario.qd.t1_x)
    return emit(schedule, scenario.qd, seed, tpe_pulse=scenario.tpe_pulse,
                stim_pulse=scenario.stim_pulse, keep_xx=keep_xx,
                threads=threads)


def simulate_polarizing(scenario: Scenario, *, seed: int | None = None,
                        threads: int = 1
                        ) -> tuple[TimeTagStream, TimeTagStream]:
    """Simulate the H and V detector streams behind a polarizing splitter."""
    seed = scenario.seed if seed is None else seed
    photons = _scenario_photons(scenario, seed, threads,
                                keep_xx=scenario.keep_xx)
    det_h, det_v = scenario.detectors
    return route_polarizing(photons, det_h, det_v,
                            substream(seed, STREAM_DETECTION),
                            duration=scenario.duration,
                            keep_xx=scenario.keep_xx)


def simulate_hbt_experiment(scenario: Scenario, mode: str, *,
                            seed: int | None = None, threads: int = 1
                            ) -> tuple[TimeTagStream, TimeTagStream]:
    """
    Simulate a Hanbury Brown–Twiss measurement.

    Parameters
    ----------
    scenario : Scenario
        The scenario.
    mode : str
        ``h`` or ``v`` for one polarization, ``combined`` for both.
    seed : int | None
        Overrides the scenario seed.
    threads : int
        Worker threads for the emission blocks.

    Returns
    -------
    tuple[TimeTagStream, TimeTagStream]
        The streams of the two splitter outputs.
    """
    if mode not in ('h', 'v', 'combined'):
        raise ParameterError(f"Invalid HBT mode: '{mode}'")
    seed = scenario.seed if seed is None else seed
    photons = _optical(_scenario_photons(scenario, seed, threads,
                                         keep_xx=scenario.keep_xx),
                       scenario.keep_xx)
    if mode != 'combined':
        photons = photons.select(
            photons.polarization == Polarization[mode.upper()]
        )
    rng = substream(seed, STREAM_OPTICS)
    ports = (rng.random(len(photons)) >= scenario.beamsplitter.r)
    return _detect_pair(photons.emit_time, ports.astype(np.int8), scenario,
                        seed, scenario.duration)


def simulate_cascade(scenario: Scenario, *, seed: int | None = None,
                     threads: int = 1
                     ) -> tuple[TimeTagStream, TimeTagStream]:
    """
    Simulate detection of the biexciton and exciton lines separately.

    Returns
    -------
    tuple[TimeTagStream, TimeTagStream]
        The XX stream (channel 1) and the X stream (channel 2).
    """
    seed = scenario.seed if seed is None else seed
    photons = _scenario_photons(scenario, seed, threads, keep_xx=True)
    ports = np.where(photons.kind == PhotonKind.XX, 0, 1).astype(np.int8)
    return _detect_pair(photons.emit_time, ports, scenario, seed,
                        scenario.duration)


def simulate_hom_experiment(scenario: Scenario, mode: HomMode | str, *,
                            polarization: Polarization = Polarization.H,
                            seed: int | None = None, threads: int = 1
                            ) -> tuple[TimeTagStream, TimeTagStream]:
    """
    Simulate the unbalanced-interferometer HOM measurement.

    The exciton stream is split into a short and a long arm and recombined
    on ``scenario.beamsplitter``. The long arm delays by one repetition
    period for ``co``/``cross`` (one polarization, selected by
    ``polarization``) and by the pair delay for ``hv``/``hv_cross`` (both
    polarizations), unless ``scenario.hom_delay`` is set. Each long-arm
    exciton photon meets the short-arm photon of the cycle it overlaps
    with and the two interfere; every other photon is routed r:t.
    ``cross`` and ``hv`` flip the polarization in the long arm.

    Parameters
    ----------
    scenario : Scenario
        The scenario.
    mode : HomMode | str
        The interferometer configuration.
    polarization : Polarization
        The polarization analyzed by ``co`` and ``cross``.
    seed : int | None
        Overrides the scenario seed.
    threads : int
        Worker threads for the emission blocks.

    Returns
    -------
    tuple[TimeTagStream, TimeTagStream]
        The streams of the two interferometer outputs.
    """
    mode = HomMode(mode)
    seed = scenario.seed if seed is None else seed
    sequence = scenario.sequence
    photons = _optical(_scenario_photons(scenario, seed, threads,
                                         keep_xx=scenario.keep_xx),
                       scenario.keep_xx)
    if mode.mixed:
        delay, step = sequence.pair_delay, 1
    else:
        photons = photons.select(photons.polarization == polarization)
        delay, step = sequence.rep_period, 2
    if scenario.hom_delay is not None:
        delay = scenario.hom_delay

    rng = substream(seed, STREAM_OPTICS)
    n = len(photons)
    long = rng.random(n) < scenario.input_split
    arrival = photons.emit_time + np.where(long, delay, 0.0)

    # pair each long-arm exciton photon with the short-arm exciton photon
    # of the cycle it catches up with
    is_x = photons.kind == PhotonKind.X
    leaders = np.flatnonzero(is_x & long)
    if mode.mixed:
        leaders = leaders[photons.cycle_index[leaders] % 2 == 0]
    followers = np.flatnonzero(is_x & ~long)
    order = np.argsort(photons.cycle_index[followers], kind='stable')
    followers = followers[order]
    wanted = photons.cycle_index[leaders] + step
    slot = np.searchsorted(photons.cycle_index[followers], wanted)
    slot = np.minimum(slot, max(len(followers) - 1, 0))
    matched = len(followers) > 0
    if matched:
        hit = photons.cycle_index[followers[slot]] == wanted
        leaders, partners = leaders[hit], followers[slot[hit]]
    else:
        leaders = partners = np.empty(0, dtype=np.intp)

    pol_long = photons.polarization[leaders]
    if mode.rotates:
        pol_long = 1 - pol_long
    overlap = np.where(
        pol_long == photons.polarization[partners],
        wavepacket_overlap(
            photons.onset_time[leaders] + delay
            - photons.onset_time[partners],
            photons.center_freq_offset[leaders]
            - photons.center_freq_offset[partners],
            scenario.qd.t1_x, scenario.qd.dephasing_rate,
        ),
        0.0,
    )

    # long arm feeds input 1, short arm input 2; reflection keeps the
    # input's port number
    reflect = rng.random(n) < scenario.beamsplitter.r
    ports = np.where(long, np.where(reflect, 0, 1),
                     np.where(reflect, 1, 0)).astype(np.int8)
    port_a, port_b = interfere(overlap, scenario.beamsplitter, rng)
    ports[leaders] = port_a
    ports[partners] = port_b
    logger.info('HOM %s: %d photons, %d interfering pairs, mean overlap %.4f',
                mode.value, n, len(leaders),
                float(overlap.mean()) if len(overlap) else 0.0)
    return _detect_pair(arrival, ports, scenario, seed,
                        scenario.duration + delay)


__all__ = [
    'BLOCK_CYCLES',
    'BeamsplitterParams',
    'DetectorModel',
    'HomMode',
    'HomOutcome',
    'PhotonBatch',
    'PhotonKind',
    'PhotonRecord',
    'detect',
    'emit',
    'hom_interfere',
    'interfere',
    'route_polarizing',
    'simulate_cascade',
    'simulate_emission',
    'simulate_hbt_experiment',
    'simulate_hom_experiment',
    'simulate_polarizing',
    'substream',
    'wavepacket_overlap',
]
