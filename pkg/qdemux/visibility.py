"""
Closed-form HOM visibilities.

The two-photon overlap of exciton photons separated by the fine-structure
splitting, averaged over Gaussian spectral wandering, is a Voigt profile
and is evaluated through the Faddeeva function.
"""

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
from scipy.special import wofz

from .errors import ParameterError
from .utils import PLANCK_EV, check_positive, ev_to_hz

logger = logging.getLogger(__name__)

#: Ratio of max(γ, 2πδν) to Σ below which the analytic limit is used.
CROSSOVER = 1e4


def correct_hom(v_raw: float, g2: float, r: float = 0.5,
                t: float = 0.5) -> float:
    """
    Correct a raw HOM visibility for multiphoton events and splitter
    imbalance.

    ``(v_raw + g2) / (1 - g2) * (r² + t²) / (2 r t)``; the result is not
    clamped and a value above 1 is logged as a warning.

    Parameters
    ----------
    v_raw : float
        The raw visibility.
    g2 : float
        The g²(0) of the source, in ``[0, 1)``.
    r, t : float
        Reflectance and transmittance of the HOM splitter, in ``(0, 1)``.

    Returns
    -------
    float
        The corrected visibility.

    Raises
    ------
    ParameterError
        If ``g2`` or the splitter is out of range.

    Examples
    --------
    >>> round(correct_hom(0.876, 0.028, 0.47, 0.53), 3)
    0.937
    """
    if not 0.0 <= g2 < 1.0:
        raise ParameterError(f"Invalid g2: must be in [0, 1), got {g2}")
    for name, value in (('r', r), ('t', t)):
        if not 0.0 < value < 1.0:
            raise ParameterError(
                f"Invalid beamsplitter: '{name}' must be in (0, 1), "
                f'got {value}'
            )
    corrected = (v_raw + g2) / (1.0 - g2) * (r * r + t * t) / (2.0 * r * t)
    if corrected > 1.0:
        logger.warning('Corrected visibility %.4f exceeds 1', corrected)
    return corrected


def faddeeva(z: complex | npt.ArrayLike) -> Any:
    """
    Return the Faddeeva function ``w(z) = exp(-z²) erfc(-iz)``.

    Examples
    --------
    >>> faddeeva(0j)
    (1+0j)
    """
    result = wofz(np.asarray(z, dtype=complex))
    return complex(result) if np.ndim(result) == 0 else result


@dataclass(frozen=True)
class Eq2Inputs:
    """
    Parameters of the wandering-averaged visibility.

    Attributes
    ----------
    t1 : float
        Radiative lifetime in seconds.
    delta_nu : float
        Center-frequency difference in Hz.
    sigma : float
        Standard deviation Σ of the relative wandering in Hz.
    gamma : float | None
        Dephasing rate in Hz, ``1/t1`` when ``None``.
    """

    t1: float
    delta_nu: float
    sigma: float = 0.0
    gamma: float | None = field(default=None)

    def __post_init__(self) -> None:
        check_positive('t1', self.t1)
        check_positive('delta_nu', self.delta_nu, strict=False)
        check_positive('sigma', self.sigma, strict=False)
        if self.gamma is not None:
            check_positive('gamma', self.gamma)

    @property
    def rate(self) -> float:
        """`float` : The dephasing rate γ in Hz."""
        return 1.0 / self.t1 if self.gamma is None else self.gamma

    @classmethod
    def from_fss(cls, t1: float, fss: float, sigma: float = 0.0,
                 pure_dephasing: float = 0.0) -> Eq2Inputs:
        """Build the inputs from an FSS in eV and a pure-dephasing rate."""
        return cls(t1, ev_to_hz(fss), sigma, 1.0 / t1 + pure_dephasing)


def visibility_limit(t1: float, delta_nu: float,
                     gamma: float | None = None) -> float:
    """
    Return the visibility without spectral wandering.

    ``γ / (T1 ((2π δν)² + γ²))``, which is ``1 / (1 + (2π δν T1)²)``
    for a lifetime-limited emitter.

    Examples
    --------
    >>> round(visibility_limit(170e-12, 1.693e9), 3)
    0.234
    """
    gamma = 1.0 / t1 if gamma is None else gamma
    omega = 2.0 * math.pi * delta_nu
    return min(gamma / (t1 * (omega * omega + gamma * gamma)), 1.0)


def _visibility(t1: npt.ArrayLike, delta_nu: npt.ArrayLike, sigma: float,
                gamma: npt.ArrayLike) -> npt.NDArray[np.float64]:
    t1 = np.asarray(t1, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    omega = 2.0 * np.pi * np.abs(np.asarray(delta_nu, dtype=float))
    # rounding can push the lifetime-limited value past 1
    limit = np.minimum(gamma / (t1 * (omega ** 2 + gamma ** 2)), 1.0)
    if sigma <= 0:
        return limit
    z = (omega + 1j * gamma) / (2.0 * np.pi * math.sqrt(2.0) * sigma)
    voigt = wofz(z).real / (math.sqrt(2.0 * np.pi) * sigma * 2.0 * t1)
    small = sigma < np.maximum(gamma, omega) / CROSSOVER
    return np.where(small, limit, np.minimum(voigt, 1.0))


def visibility_eq2(inputs: Eq2Inputs) -> float:
    """
    Return the HOM visibility averaged over Gaussian spectral wandering.

    ``Re w(z) / (√(2π) Σ 2 T1)`` with
    ``z = (2π δν + iγ) / (2π √2 Σ)``.
    Below ``Σ = max(γ, 2π δν) / 1e4`` the expression cancels
    catastrophically and :func:`visibility_limit` is returned instead.

    Parameters
    ----------
    inputs : Eq2Inputs
        Lifetime, detuning, wandering and dephasing.

    Returns
    -------
    float
        The visibility in ``(0, 1]``.
    """
    return float(_visibility(inputs.t1, inputs.delta_nu, inputs.sigma,
                             inputs.rate))


@dataclass(frozen=True)
class VisibilityMap:
    """
    Visibility over a lifetime × FSS grid.

    Attributes
    ----------
    t1 : NDArray[float64]
        Lifetimes in seconds (rows).
    fss : NDArray[float64]
        Splittings in eV (columns).
    values : NDArray[float64]
        Visibilities of shape ``(len(t1), len(fss))``.
    sigma : float
        Wandering Σ in Hz.
    pure_dephasing : float
        Pure-dephasing rate in Hz.
    """

    t1: npt.NDArray[np.float64] = field(repr=False)
    fss: npt.NDArray[np.float64] = field(repr=False)
    values: npt.NDArray[np.float64] = field(repr=False)
    sigma: float = 0.0
    pure_dephasing: float = 0.0

    def line_cut(self, t1: float) -> npt.NDArray[np.float64]:
        """Return the visibility along the FSS axis at a fixed lifetime."""
        return _row(t1, self.fss, self.sigma, self.pure_dephasing)

    def to_table(self, target: str | PathLike[str],
                 provenance: dict[str, Any] | None = None) -> None:
        """Write ``t1_ps fss_ueV visibility`` rows."""
        t1, fss = np.meshgrid(self.t1, self.fss, indexing='ij')
        rows = np.column_stack([t1.ravel() * 1e12, fss.ravel() * 1e6,
                                self.values.ravel()])
        header = {'sigma': self.sigma, 'pure_dephasing': self.pure_dephasing,
                  **(provenance or {})}
        np.savetxt(fspath(target), rows, fmt=('%.6g', '%.6g', '%.9f'),
                   header=f'{json.dumps(header, sort_keys=True)}\n'
                   't1_ps fss_ueV visibility')


def _row(t1: float, fss: npt.NDArray[np.float64], sigma: float,
         pure_dephasing: float) -> npt.NDArray[np.float64]:
    delta_nu = np.asarray(fss, dtype=float) / PLANCK_EV
    return _visibility(t1, delta_nu, sigma, 1.0 / t1 + pure_dephasing)


def _increasing(name: str, values: npt.NDArray[np.float64]) -> None:
    if values.ndim != 1 or values.size == 0 or np.any(np.diff(values) <= 0):
        raise ParameterError(
            f"Invalid grid: '{name}' must be strictly increasing"
        )


def visibility_map(t1_range: npt.ArrayLike, fss_range: npt.ArrayLike,
                   sigma: float = 0.0, pure_dephasing: float = 0.0, *,
                   threads: int = 1) -> VisibilityMap:
    """
    Evaluate :func:`visibility_eq2` over a lifetime × FSS grid.

    Parameters
    ----------
    t1_range : ArrayLike
        Strictly increasing lifetimes in seconds.
    fss_range : ArrayLike
        Strictly increasing splittings in eV.
    sigma : float
        Wandering Σ in Hz.
    pure_dephasing : float
        Rate added to ``1/t1`` to form γ, in Hz.
    threads : int
        Worker threads; rows are computed independently.

    Returns
    -------
    VisibilityMap
        The grid with its axes.
    """
    t1 = np.asarray(t1_range, dtype=float)
    fss = np.asarray(fss_range, dtype=float)
    _increasing('t1_range', t1)
    _increasing('fss_range', fss)
    check_positive('t1_range', float(t1[0]))
    check_positive('sigma', sigma, strict=False)

    def run(value: float) -> npt.NDArray[np.float64]:
        return _row(value, fss, sigma, pure_dephasing)

    with ThreadPoolExecutor(max_workers=max(threads, 1)) as executor:
        rows = list(executor.map(run, t1.tolist()))
    logger.info('Visibility map: %d x %d cells', t1.size, fss.size)
    return VisibilityMap(t1, fss, np.vstack(rows), sigma, pure_dephasing)


__all__ = [
    'CROSSOVER',
    'Eq2Inputs',
    'VisibilityMap',
    'correct_hom',
    'faddeeva',
    'visibility_eq2',
    'visibility_limit',
    'visibility_map',
]
