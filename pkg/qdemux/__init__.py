"""Simulate and analyze passively demultiplexed quantum-dot photon pairs."""

from importlib.metadata import version

from .errors import (
    ConfigError,
    DataError,
    FitError,
    NormalizationError,
    ParameterError,
    QdemuxError,
)
from .model import Polarization, PulseParameters, QdParameters
from .scenario import Experiment, Scenario, load_scenario
from .sequence import SequenceConfig, build_sequence

__version__: str = version(__name__)

__all__ = [
    'ConfigError',
    'DataError',
    'Experiment',
    'FitError',
    'NormalizationError',
    'ParameterError',
    'Polarization',
    'PulseParameters',
    'QdParameters',
    'QdemuxError',
    'Scenario',
    'SequenceConfig',
    'build_sequence',
    'load_scenario',
]
