"""Miscellaneous utilities and physical constants."""

from __future__ import annotations

import math
from typing import Any

from .errors import ParameterError

#: Planck constant in eV·s.
PLANCK_EV: float = 4.135667696e-15

#: Speed of light in m/s.
SPEED_OF_LIGHT: float = 299_792_458.0

#: Picoseconds per second.
PS: int = 1_000_000_000_000

_truthy = ('1', 'on', 'y', 'yes', 'true')

_falsy = ('', '0', 'off', 'n', 'no', 'false')


def is_truthy(arg: Any) -> bool:
    """
    Check if the given argument is truthy.

    Parameters
    ----------
    arg : Any
        The argument to check.

    Returns
    -------
    bool
        True if ``arg`` is truthy.

    Examples
    --------
    >>> is_truthy('ON')
    True
    >>> is_truthy(10)
    False
    """
    return str(arg).lower() in _truthy


def is_falsy(arg: Any) -> bool:
    """
    Check if the given argument is falsy.

    Parameters
    ----------
    arg : Any
        The argument to check.

    Returns
    -------
    bool
        True if ``arg`` is falsy.

    Examples
    --------
    >>> is_falsy('NO')
    True
    >>> is_falsy(-1)
    False
    """
    return str(arg).lower() in _falsy


def ev_to_hz(energy: float) -> float:
    """
    Convert an energy in eV to a frequency in Hz.

    Examples
    --------
    >>> round(ev_to_hz(7e-6) / 1e9, 3)
    1.693
    """
    return energy / PLANCK_EV


def wavelength_to_ev(wavelength: float) -> float:
    """Return the photon energy in eV of a vacuum wavelength in metres."""
    return PLANCK_EV * SPEED_OF_LIGHT / wavelength


def to_ps(seconds: float) -> int:
    """Round a duration in seconds to integer picoseconds."""
    return int(round(seconds * PS))


def check_probability(name: str, value: float) -> None:
    """
    Validate that a value is a probability.

    Parameters
    ----------
    name : str
        The name used in the error message.
    value : float
        The value to check.

    Raises
    ------
    ParameterError
        If the value is not a finite number in ``[0, 1]``.
    """
    if not math.isfinite(value) or not 0.0 <= value <= 1.0:
        raise ParameterError(
            f"Invalid probability: '{name}' must be in [0, 1], got {value}"
        )


def check_positive(name: str, value: float, *, strict: bool = True) -> None:
    """
    Validate that a value is positive (or non-negative).

    Raises
    ------
    ParameterError
        If the value is not finite or has the wrong sign.
    """
    ok = value > 0.0 if strict else value >= 0.0
    if not math.isfinite(value) or not ok:
        bound = '> 0' if strict else '>= 0'
        raise ParameterError(
            f"Invalid value: '{name}' must be {bound}, got {value}"
        )


__all__ = [
    'PLANCK_EV',
    'PS',
    'SPEED_OF_LIGHT',
    'check_positive',
    'check_probability',
    'ev_to_hz',
    'is_falsy',
    'is_truthy',
    'to_ps',
    'wavelength_to_ev',
]
