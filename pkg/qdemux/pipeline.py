"""Experiment runners tying simulation and analysis together."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, replace
from os import PathLike
from pathlib import Path
from typing import Any, Callable, NamedTuple

import numpy as np
import numpy.typing as npt

from .analysis import (
    extract_g2,
    extract_hom_visibility,
    fit_fss,
    fit_lifetime,
)
from .correlate import CoincidenceHistogram, cross_correlate
from .errors import DataError, ParameterError
from .model import (
    Polarization,
    QdParameters,
    fss_scan,
    rabi_map,
    reexcitation_for_g2,
    stim_efficiency,
)
from .scenario import Experiment, Scenario, scenario_hash
from .timetags import TimeTagStream, write_tags
from .trajectory import (
    BeamsplitterParams,
    HomMode,
    simulate_cascade,
    simulate_hbt_experiment,
    simulate_hom_experiment,
    simulate_polarizing,
    substream,
)
from .utils import PS, to_ps
from .visibility import (
    Eq2Inputs,
    correct_hom,
    visibility_eq2,
    visibility_limit,
    visibility_map,
)

logger = logging.getLogger(__name__)

#: Values reported for the source the default scenario models.
TARGETS: dict[str, float] = {
    'g2_h': 0.028,
    'g2_v': 0.022,
    'hom_raw_h': 0.876,
    'hom_raw_v': 0.840,
    'hom_corrected_h': 0.937,
    'hom_corrected_v': 0.90,
    'hom_raw_hv': 0.28,
    'lifetime_ps': 175.0,
    'fss_ueV': 7.0,
    'hv_bound': 0.25,
}

#: Substream of the synthetic FSS measurement.
STREAM_FSS = 3

_HOM_MODES: dict[Experiment, tuple[HomMode, Polarization]] = {
    Experiment.HOM_CO_H: (HomMode.CO, Polarization.H),
    Experiment.HOM_CROSS_H: (HomMode.CROSS, Polarization.H),
    Experiment.HOM_CO_V: (HomMode.CO, Polarization.V),
    Experiment.HOM_CROSS_V: (HomMode.CROSS, Polarization.V),
    Experiment.HOM_HV: (HomMode.HV, Polarization.H),
    Experiment.HOM_HV_CROSS: (HomMode.HV_CROSS, Polarization.H),
}


class ScanPoint(NamedTuple):
    """One stim delay of a delay scan."""

    delay: float
    ratio: float
    uncertainty: float
    model: float


def provenance(scenario: Scenario, seed: int | None = None
               ) -> dict[str, Any]:
    """Return the header entries that identify a run."""
    return {
        'seed': scenario.seed if seed is None else seed,
        'scenario_hash': scenario_hash(scenario),
        'experiment': scenario.experiment.value,
        'duration': scenario.duration,
    }


def _gated(stream: TimeTagStream, period: float, start: float,
           stop: float) -> int:
    phase = np.mod(stream.tags, to_ps(period))
    return int(np.count_nonzero((phase >= to_ps(start))
                                & (phase < to_ps(stop))))


def delay_scan(scenario: Scenario, delays: npt.ArrayLike | None = None,
               polarization: Polarization = Polarization.V, *,
               seed: int | None = None,
               threads: int = 1) -> list[ScanPoint]:
    """
    Simulate the stim-delay scan of one branch.

    For each delay the photons of ``polarization`` emitted within the
    time gate of the pulse pair stimulating that branch are counted and
    divided by the count with every stim pulse off. The model column is
    ``1 + η(δt) (2 stim_fidelity - 1)``.

    Parameters
    ----------
    scenario : Scenario
        The scenario; its stim delay is replaced by each scanned value.
    delays : ArrayLike | None
        Stim delays in seconds, ``scenario.scan.delays`` by default.
    polarization : Polarization
        The scanned branch.
    seed : int | None
        Overrides the scenario seed.
    threads : int
        Worker threads for the emission blocks.

    Returns
    -------
    list[ScanPoint]
        Ratio, its Poissonian uncertainty and the model per delay.
    """
    seq = scenario.sequence
    delays = np.asarray(scenario.scan.delays if delays is None else delays,
                        dtype=float)
    start = 0.0 if seq.first == polarization else seq.pair_delay
    stop = seq.pair_delay if seq.first == polarization else seq.rep_period
    index = int(polarization)

    def count(sequence: Any) -> int:
        run = replace(scenario, sequence=sequence)
        streams = simulate_polarizing(run, seed=seed, threads=threads)
        return _gated(streams[index], seq.rep_period, start, stop)

    reference = count(replace(seq, stim_enabled_h=False,
                              stim_enabled_v=False))
    if reference == 0:
        raise DataError('Delay scan: no photons without stimulation')
    points = []
    for delay in delays.tolist():
        counts = count(replace(seq, stim_delay=delay))
        ratio = counts / reference
        eta = stim_efficiency(delay, scenario.stim_pulse, scenario.qd,
                              scenario.tpe_pulse)
        points.append(ScanPoint(
            delay, ratio, ratio * math.sqrt(1 / max(counts, 1)
                                            + 1 / reference),
            1.0 + eta * (2.0 * scenario.qd.stim_fidelity - 1.0),
        ))
        logger.info('Stim delay %.1f ps: ratio %.3f', delay * 1e12, ratio)
    return points


def simulate(scenario: Scenario, *, seed: int | None = None,
             threads: int = 1) -> tuple[TimeTagStream, TimeTagStream]:
    """
    Simulate the detector streams of a time-tag experiment.

    Raises
    ------
    ParameterError
        If the experiment produces a table instead of streams.
    """
    experiment = scenario.experiment
    if experiment in _HOM_MODES:
        mode, pol = _HOM_MODES[experiment]
        return simulate_hom_experiment(scenario, mode, polarization=pol,
                                       seed=seed, threads=threads)
    if experiment is Experiment.LIFETIME:
        return simulate_cascade(scenario, seed=seed, threads=threads)
    if experiment.value.startswith('hbt_'):
        return simulate_hbt_experiment(
            scenario, experiment.value.removeprefix('hbt_'),
            seed=seed, threads=threads,
        )
    raise ParameterError(
        f"Experiment '{experiment.value}' has no tag streams"
    )


def histogram(scenario: Scenario, streams: tuple[TimeTagStream,
                                                 TimeTagStream], *,
              threads: int = 1) -> CoincidenceHistogram:
    """Correlate two streams with the scenario's binning."""
    return cross_correlate(streams[0], streams[1], scenario.bin_width,
                           scenario.span, threads=threads)


def _write_table(path: Path, header: dict[str, Any], columns: str,
                 rows: npt.ArrayLike, fmt: str | tuple[str, ...]) -> None:
    np.savetxt(path, np.asarray(rows), fmt=fmt, header=(
        f'{json.dumps(header, sort_keys=True)}\n{columns}'
    ))


def write_scan(path: Path, points: list[ScanPoint],
               header: dict[str, Any]) -> None:
    """Write a delay scan as ``delay_ps ratio uncertainty model`` rows."""
    rows = [(p.delay * PS, p.ratio, p.uncertainty, p.model) for p in points]
    _write_table(path, header, 'delay_ps ratio uncertainty model', rows,
                 ('%.3f', '%.6f', '%.6f', '%.6f'))


def write_rabi_map(path: Path, scenario: Scenario,
                   header: dict[str, Any]) -> None:
    """Write ``area detuning_hz probability`` rows of the Rabi map."""
    scan = scenario.scan
    grid = rabi_map(scan.areas, scan.detunings, scenario.qd,
                    scenario.tpe_pulse.duration)
    area, detuning = np.meshgrid(scan.areas, scan.detunings, indexing='ij')
    rows = np.column_stack([area.ravel(), detuning.ravel(), grid.ravel()])
    _write_table(path, header, 'area detuning_hz probability', rows,
                 ('%.4f', '%.6e', '%.9f'))


@dataclass(frozen=True)
class ReproduceOptions:
    """
    Knobs of :func:`reproduce`.

    Attributes
    ----------
    n_periods : int
        Laser periods simulated per tag experiment.
    lifetime_periods : int
        Laser periods of the lifetime experiment.
    map_points : int
        Points per axis of the visibility map.
    tag_suffix : str
        File suffix of the tag streams, ``.txt`` or ``.npz``.
    write_tags : bool
        Whether the tag streams are written as well.
    """

    n_periods: int = 200_000
    lifetime_periods: int = 500_000
    map_points: int = 200
    tag_suffix: str = '.npz'
    write_tags: bool = False


def default_scenario(seed: int = 0) -> Scenario:
    """Return the scenario of the source the figures of merit describe."""
    return Scenario(
        qd=QdParameters(t1_x=175e-12, fss=7.0e-6, sigma=0.23e9),
        beamsplitter=BeamsplitterParams(r=0.47, t=0.53),
        seed=seed,
    )


def _metric(value: float, uncertainty: float, key: str) -> dict[str, float]:
    return {'value': round(value, 6), 'uncertainty': round(uncertainty, 6),
            'target': TARGETS[key]}


def reproduce(scenario: Scenario, out: str | PathLike[str], *,
              seed: int | None = None, threads: int = 1,
              options: ReproduceOptions | None = None) -> dict[str, Any]:
    """
    Run every experiment and write result tables and ``summary.json``.

    Parameters
    ----------
    scenario : Scenario
        The base scenario; the experiment field is replaced per run.
    out : str | PathLike
        The output directory.
    seed : int | None
        Overrides the scenario seed.
    threads : int
        Worker threads.
    options : ReproduceOptions | None
        Run lengths and output switches.

    Returns
    -------
    dict[str, Any]
        The summary document.
    """
    options = options or ReproduceOptions()
    seed = scenario.seed if seed is None else seed
    scenario = replace(scenario, seed=seed, sequence=replace(
        scenario.sequence, n_periods=options.n_periods))
    root = Path(out)
    root.mkdir(parents=True, exist_ok=True)
    header = provenance(scenario)
    metrics: dict[str, Any] = {}
    bs = scenario.beamsplitter
    seq = scenario.sequence

    write_rabi_map(root / 'rabi_map.txt', scenario, header)
    write_scan(root / 'delay_scan.txt',
               delay_scan(scenario, threads=threads), header)

    def run(experiment: Experiment, g2: float | None = None,
            update: Callable[[Scenario], Scenario] | None = None
            ) -> CoincidenceHistogram:
        case = replace(scenario, experiment=experiment)
        if g2 is not None:
            case = replace(case, qd=replace(
                case.qd, reexcitation_prob=reexcitation_for_g2(g2)))
        if update is not None:
            case = update(case)
        streams = simulate(case, threads=threads)
        meta = provenance(case)
        if options.write_tags:
            for stream in streams:
                write_tags(root / f'{experiment.value}_ch{stream.channel}'
                           f'{options.tag_suffix}', stream, meta)
        h = histogram(case, streams, threads=threads)
        h.to_table(root / f'histogram_{experiment.value}.txt', meta)
        return h

    hbt = {pol: run(Experiment(f'hbt_{pol}'), TARGETS[f'g2_{pol}'])
           for pol in ('h', 'v')}
    run(Experiment.HBT_COMBINED)
    g2 = {}
    for pol, h in hbt.items():
        result = extract_g2(h, seq.rep_period, scenario.window)
        g2[pol] = result.value
        metrics[f'g2_{pol}'] = _metric(result.value, result.uncertainty,
                                       f'g2_{pol}')

    for pol in ('h', 'v'):
        co = run(Experiment(f'hom_co_{pol}'), TARGETS[f'g2_{pol}'])
        cross = run(Experiment(f'hom_cross_{pol}'), TARGETS[f'g2_{pol}'])
        raw = extract_hom_visibility(co, cross, scenario.window,
                                     seq.rep_period)
        metrics[f'hom_raw_{pol}'] = _metric(raw.value, raw.uncertainty,
                                            f'hom_raw_{pol}')
        corrected = correct_hom(raw.value, g2[pol], bs.r, bs.t)
        scale = corrected / raw.value if raw.value else 0.0
        metrics[f'hom_corrected_{pol}'] = _metric(
            corrected, abs(scale) * raw.uncertainty, f'hom_corrected_{pol}'
        )

    hv = extract_hom_visibility(run(Experiment.HOM_HV),
                                run(Experiment.HOM_HV_CROSS),
                                scenario.window, seq.rep_period)
    metrics['hom_raw_hv'] = _metric(hv.value, hv.uncertainty, 'hom_raw_hv')

    decay = run(Experiment.LIFETIME, update=lambda case: replace(
        case, span=5e-9, sequence=replace(
            case.sequence, n_periods=options.lifetime_periods)))
    # the next pulse pair's cascade starts one pair delay later
    t1 = fit_lifetime(decay, fit_range=min(2e-9, 0.75 * seq.pair_delay))
    metrics['lifetime_ps'] = _metric(t1.value * 1e12, t1.uncertainty * 1e12,
                                     'lifetime_ps')

    angles = np.linspace(0.0, np.pi, 36, endpoint=False)
    samples = fss_scan(scenario.qd, angles, 0.1e-6,
                       substream(seed, STREAM_FSS))
    _write_table(root / 'fss_scan.txt', header, 'angle_rad energy_eV',
                 samples, ('%.6f', '%.9f'))
    fss = fit_fss(samples)
    metrics['fss_ueV'] = _metric(fss.value * 1e6, fss.uncertainty * 1e6,
                                 'fss_ueV')

    qd = scenario.qd
    grid = visibility_map(
        np.linspace(20e-12, 500e-12, options.map_points),
        np.linspace(0.0, 20e-6, options.map_points),
        sigma=0.0, pure_dephasing=qd.pure_dephasing, threads=threads,
    )
    grid.to_table(root / 'visibility_map.txt', header)
    cut = grid.line_cut(170e-12)
    _write_table(root / 'line_cut.txt', header, 'fss_ueV visibility',
                 np.column_stack([grid.fss * 1e6, cut]), ('%.6g', '%.9f'))
    bound = visibility_limit(170e-12, Eq2Inputs.from_fss(
        170e-12, qd.fss).delta_nu)
    metrics['hv_bound'] = _metric(bound, 0.0, 'hv_bound')
    predicted = visibility_eq2(Eq2Inputs.from_fss(
        qd.t1_x, qd.fss, qd.sigma, qd.pure_dephasing))

    summary = {
        'provenance': header,
        'metrics': metrics,
        'models': {'hom_hv_eq2': round(predicted, 6)},
    }
    with open(root / 'summary.json', 'w', encoding='utf-8') as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write('\n')
    logger.info('Reproduction written to %s', root)
    return summary


__all__ = [
    'ReproduceOptions',
    'ScanPoint',
    'TARGETS',
    'default_scenario',
    'delay_scan',
    'histogram',
    'provenance',
    'reproduce',
    'simulate',
    'write_rabi_map',
    'write_scan',
]
