"""
Scenario documents.

A scenario is a JSON document in SI units (seconds, Hz, eV) describing
the quantum dot, the pulse sequence, the optics and the detectors of one
experiment. Every problem found while loading is collected and reported
together in one :class:`~qdemux.errors.ConfigError`.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import MISSING, dataclass, field, fields, is_dataclass
from enum import Enum
from os import PathLike, fspath
from typing import Any, Mapping

from .errors import ConfigError, QdemuxError
from .model import Polarization, PulseParameters, QdParameters
from .sequence import SequenceConfig
from .trajectory import BeamsplitterParams, DetectorModel
from .utils import check_positive, check_probability

logger = logging.getLogger(__name__)


class Experiment(str, Enum):
    """The experiments a scenario can describe."""

    HBT_H = 'hbt_h'
    HBT_V = 'hbt_v'
    HBT_COMBINED = 'hbt_combined'
    HOM_CO_H = 'hom_co_h'
    HOM_CROSS_H = 'hom_cross_h'
    HOM_CO_V = 'hom_co_v'
    HOM_CROSS_V = 'hom_cross_v'
    HOM_HV = 'hom_hv'
    HOM_HV_CROSS = 'hom_hv_cross'
    DELAY_SCAN = 'delay_scan'
    RABI_MAP = 'rabi_map'
    LIFETIME = 'lifetime'


@dataclass(frozen=True)
class ScanConfig:
    """
    Axes of the scanned experiments.

    Attributes
    ----------
    delays : tuple[float, ...]
        Stim delays in seconds for the delay scan.
    areas : tuple[float, ...]
        Pulse areas in units of π for the Rabi map.
    detunings : tuple[float, ...]
        Drive detunings in Hz for the Rabi map.
    """

    delays: tuple[float, ...] = (-20e-12, -10e-12, -5e-12, 0.0, 3e-12,
                                 6e-12, 10e-12, 20e-12, 50e-12, 100e-12)
    areas: tuple[float, ...] = tuple(i / 20 for i in range(81))
    detunings: tuple[float, ...] = tuple(i * 2.5e10 for i in range(-20, 21))


@dataclass(frozen=True)
class Scenario:
    """
    Everything needed to simulate one experiment.

    Attributes
    ----------
    qd : QdParameters
        The quantum dot.
    sequence : SequenceConfig
        The pulse sequence.
    detectors : tuple[DetectorModel, DetectorModel]
        The detectors of channels 1 and 2.
    beamsplitter : BeamsplitterParams
        The HBT or HOM splitter.
    experiment : Experiment
        What to simulate.
    seed : int
        Master seed of the random substreams.
    tpe_pulse : PulseParameters
        The two-photon excitation pulse.
    stim_pulse : PulseParameters
        The stimulation pulse.
    input_split : float
        Probability of the long arm of the HOM interferometer.
    hom_delay : float | None
        Overrides the HOM interferometer delay in seconds.
    keep_xx : bool
        Whether the biexciton photons are kept.
    scan : ScanConfig
        Axes of the scanned experiments.
    bin_width : float
        Histogram bin width in seconds.
    span : float
        Histogram half-range in seconds.
    window : float
        Peak integration window in seconds.
    """

    qd: QdParameters = field(default_factory=QdParameters)
    sequence: SequenceConfig = field(default_factory=SequenceConfig)
    detectors: tuple[DetectorModel, DetectorModel] = (
        DetectorModel(), DetectorModel(),
    )
    beamsplitter: BeamsplitterParams = field(
        default_factory=BeamsplitterParams
    )
    experiment: Experiment = Experiment.HBT_COMBINED
    seed: int = 0
    tpe_pulse: PulseParameters = field(default_factory=PulseParameters)
    stim_pulse: PulseParameters = field(default_factory=PulseParameters)
    input_split: float = 0.5
    hom_delay: float | None = None
    keep_xx: bool = False
    scan: ScanConfig = field(default_factory=ScanConfig)
    bin_width: float = 50e-12
    span: float = 100e-9
    window: float = 1e-9

    def __post_init__(self) -> None:
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError('Invalid scenario',
                              [f'seed: must be a 64-bit integer, '
                               f'got {self.seed}'])
        check_probability('input_split', self.input_split)
        check_positive('bin_width', self.bin_width)
        check_positive('span', self.span)
        check_positive('window', self.window)
        if self.hom_delay is not None:
            check_positive('hom_delay', self.hom_delay, strict=False)

    @property
    def duration(self) -> float:
        """`float` : Length of the run in seconds."""
        return self.sequence.n_periods * self.sequence.rep_period

    def to_dict(self) -> dict[str, Any]:
        """Return the canonical JSON-serializable representation."""
        return _dump(self)


def _dump(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.name if isinstance(value, Polarization) \
            else value.value
    if is_dataclass(value) and not isinstance(value, type):
        return {f.name: _dump(getattr(value, f.name)) for f in fields(value)}
    if isinstance(value, (tuple, list)):
        return [_dump(v) for v in value]
    return value


def scenario_hash(scenario: Scenario) -> str:
    """
    Return the first 16 hex digits of the SHA-256 of the canonical JSON.

    Examples
    --------
    >>> len(scenario_hash(Scenario()))
    16
    """
    text = json.dumps(scenario.to_dict(), sort_keys=True,
                      separators=(',', ':'))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _convert(value: Any, kind: Any, path: str, issues: list[str]) -> Any:
    """Check and convert a JSON scalar against an annotation string."""
    kind = str(kind)
    if value is None and kind.endswith('| None'):
        return None
    kind = kind.removesuffix(' | None')
    if kind == 'bool':
        if isinstance(value, bool):
            return value
    elif kind == 'int':
        if isinstance(value, int) and not isinstance(value, bool):
            return value
    elif kind == 'float':
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            if math.isfinite(value):
                return float(value)
    elif kind == 'Polarization':
        if isinstance(value, str) and value.upper() in ('H', 'V'):
            return Polarization[value.upper()]
    elif kind == 'Experiment':
        try:
            return Experiment(value)
        except ValueError:
            choices = ', '.join(e.value for e in Experiment)
            issues.append(f'{path}: unknown experiment {value!r} '
                          f'(expected one of {choices})')
            return MISSING
    elif kind == 'tuple[float, ...]':
        if isinstance(value, list):
            items = [_convert(v, 'float', f'{path}[{i}]', issues)
                     for i, v in enumerate(value)]
            return MISSING if MISSING in items else tuple(items)
    else:  # pragma: no cover
        raise TypeError(f'Unsupported field type {kind}')
    issues.append(f'{path}: expected {kind}, got {value!r}')
    return MISSING


def _build(cls: Any, data: Any, path: str, issues: list[str]) -> Any:
    """Build a flat dataclass from a JSON object."""
    if not isinstance(data, Mapping):
        issues.append(f'{path}: expected an object, got {data!r}')
        return MISSING
    known = {f.name: f for f in fields(cls)}
    for key in data:
        if key not in known:
            issues.append(f'{path}.{key}: unknown field')
    kwargs = {}
    for name, value in data.items():
        if name in known:
            converted = _convert(value, known[name].type,
                                 f'{path}.{name}', issues)
            if converted is not MISSING:
                kwargs[name] = converted
    try:
        return cls(**kwargs)
    except ConfigError as e:
        issues.extend(f'{path}.{issue}' for issue in e.issues)
    except QdemuxError as e:
        issues.append(f'{path}: {e}')
    return MISSING


_SECTIONS: dict[str, Any] = {
    'qd': QdParameters,
    'sequence': SequenceConfig,
    'beamsplitter': BeamsplitterParams,
    'tpe_pulse': PulseParameters,
    'stim_pulse': PulseParameters,
    'scan': ScanConfig,
}

_SCALARS = {
    'experiment': 'Experiment',
    'seed': 'int',
    'input_split': 'float',
    'hom_delay': 'float | None',
    'keep_xx': 'bool',
    'bin_width': 'float',
    'span': 'float',
    'window': 'float',
}


def scenario_from_dict(data: Mapping[str, Any]) -> Scenario:
    """
    Validate and build a scenario from a decoded JSON document.

    ``detectors`` is a list of one or two detector objects (one is used
    for both channels). ``duration`` in seconds may replace
    ``sequence.n_periods``.

    Raises
    ------
    ConfigError
        With one ``path: message`` issue per problem found.
    """
    issues: list[str] = []
    if not isinstance(data, Mapping):
        raise ConfigError('Invalid scenario',
                          [f'scenario: expected an object, got {data!r}'])
    kwargs: dict[str, Any] = {}
    allowed = {*_SECTIONS, *_SCALARS, 'detectors', 'duration'}
    for key in data:
        if key not in allowed:
            issues.append(f'scenario.{key}: unknown field')

    raw_sequence = data.get('sequence', {})
    sequence = dict(raw_sequence) if isinstance(raw_sequence, Mapping) \
        else raw_sequence
    if 'duration' in data and isinstance(sequence, dict):
        duration = _convert(data['duration'], 'float',
                            'scenario.duration', issues)
        if duration is not MISSING:
            if 'n_periods' in sequence:
                issues.append('scenario.duration: conflicts with '
                              'sequence.n_periods')
            period = sequence.get('rep_period', SequenceConfig.rep_period)
            if isinstance(period, (int, float)) and period > 0 \
                    and duration > 0:
                sequence['n_periods'] = math.ceil(duration / period - 1e-9)
            else:
                issues.append('scenario.duration: must be > 0 with a '
                              'valid rep_period')

    for name, cls in _SECTIONS.items():
        section = sequence if name == 'sequence' else data.get(name)
        if name in data or (name == 'sequence' and sequence):
            value = _build(cls, section, f'scenario.{name}', issues)
            if value is not MISSING:
                kwargs[name] = value
    for name, kind in _SCALARS.items():
        if name in data:
            value = _convert(data[name], kind, f'scenario.{name}', issues)
            if value is not MISSING:
                kwargs[name] = value

    if 'detectors' in data:
        raw = data['detectors']
        if not isinstance(raw, list) or len(raw) not in (1, 2):
            issues.append('scenario.detectors: expected a list of one or '
                          'two detectors')
        else:
            built = [_build(DetectorModel, d, f'scenario.detectors[{i}]',
                            issues) for i, d in enumerate(raw)]
            if MISSING not in built:
                kwargs['detectors'] = (built[0], built[-1])

    if not issues:
        try:
            return Scenario(**kwargs)
        except ConfigError as e:
            issues.extend(f'scenario.{issue}' for issue in e.issues)
        except QdemuxError as e:
            issues.append(f'scenario: {e}')
    raise ConfigError('Invalid scenario', issues)


def load_scenario(source: str | PathLike[str]) -> Scenario:
    """
    Read a scenario document.

    Raises
    ------
    ConfigError
        If the file is missing, is not JSON or does not validate.
    """
    source = fspath(source)
    try:
        with open(source, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError(f"Cannot read scenario '{source}': "
                          f'{e.strerror}') from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid scenario '{source}'",
                          [f'line {e.lineno}: {e.msg}']) from e
    scenario = scenario_from_dict(data)
    logger.info('Loaded scenario %s (%s, seed %d)', scenario_hash(scenario),
                scenario.experiment.value, scenario.seed)
    return scenario


__all__ = [
    'Experiment',
    'ScanConfig',
    'Scenario',
    'load_scenario',
    'scenario_from_dict',
    'scenario_hash',
]
