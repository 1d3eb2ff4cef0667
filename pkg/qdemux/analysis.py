"""Figures of merit extracted from coincidence histograms and scans."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Any, NamedTuple, Sequence

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit

from .correlate import CoincidenceHistogram
from .errors import FitError, NormalizationError, ParameterError

logger = logging.getLogger(__name__)


class Estimate(NamedTuple):
    """A fitted value with its standard error."""

    value: float
    uncertainty: float


@dataclass(frozen=True)
class VisibilityResult:
    """
    A g²(0) or HOM visibility with its Poissonian uncertainty.

    Attributes
    ----------
    value : float
        The estimate.
    uncertainty : float
        One standard deviation.
    window : float
        Integration window in seconds.
    peak_areas : dict[str, float]
        The peak areas entering the estimate.
    """

    value: float
    uncertainty: float
    window: float
    peak_areas: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.uncertainty >= 0:
            raise ParameterError(
                f'Invalid uncertainty: must be >= 0, got {self.uncertainty}'
            )

    def to_dict(self) -> dict[str, Any]:
        """Return a JSON-serializable representation."""
        return {'value': self.value, 'uncertainty': self.uncertainty,
                'window': self.window, 'peak_areas': dict(self.peak_areas)}


def extract_g2(h: CoincidenceHistogram, rep_period: float = 12.5e-9,
               window: float = 1e-9) -> VisibilityResult:
    """
    Return the central peak area over the mean area of the first side peaks.

    Parameters
    ----------
    h : CoincidenceHistogram
        An HBT histogram spanning at least ``±(rep_period + window/2)``.
    rep_period : float
        Position of the side peaks in seconds.
    window : float
        Integration window in seconds.

    Returns
    -------
    VisibilityResult
        g²(0) with the uncertainty propagated from the three areas.

    Raises
    ------
    NormalizationError
        If both side peaks are empty.
    """
    central = h.area(0.0, window)
    left = h.area(-rep_period, window)
    right = h.area(rep_period, window)
    side = (left + right) / 2.0
    if side == 0:
        raise NormalizationError(
            f'Cannot normalize g2: side peaks at ±{rep_period:.4g} s '
            'are empty'
        )
    value = central / side
    uncertainty = math.sqrt(central / side ** 2
                            + value ** 2 * (left + right) / (4 * side ** 2))
    logger.info('g2(0) = %.4f ± %.4f', value, uncertainty)
    return VisibilityResult(value, uncertainty, window, {
        'central': central, 'left': left, 'right': right,
    })


def _side_norm(h: CoincidenceHistogram, offset: float,
               window: float, name: str) -> int:
    total = h.area(-offset, window) + h.area(offset, window)
    if total == 0:
        raise NormalizationError(
            f'Cannot normalize {name}: side peaks at ±{offset:.4g} s '
            'are empty'
        )
    return total


def extract_hom_visibility(co: CoincidenceHistogram,
                           cross: CoincidenceHistogram,
                           window: float = 1e-9,
                           rep_period: float = 12.5e-9, *,
                           normalize: bool = True) -> VisibilityResult:
    """
    Compare the central peak of a co-polarized HOM histogram to the
    cross-polarized reference.

    With ``normalize`` both central areas are divided by the summed areas
    of their side peaks at ``±2 * rep_period``, which lie outside the
    interference structure and cancel differing acquisition times.

    Parameters
    ----------
    co : CoincidenceHistogram
        The co-polarized histogram.
    cross : CoincidenceHistogram
        The cross-polarized histogram.
    window : float
        Integration window in seconds.
    rep_period : float
        Laser repetition period in seconds.
    normalize : bool
        Whether to normalize by the far side peaks.

    Returns
    -------
    VisibilityResult
        ``1 - A_co / A_cross`` with a Poissonian uncertainty.

    Raises
    ------
    NormalizationError
        If the cross-polarized central peak or a side normalization
        is empty.
    """
    a_co = co.area(0.0, window)
    a_cross = cross.area(0.0, window)
    if a_cross == 0:
        raise NormalizationError(
            'Cannot normalize HOM: the cross-polarized central peak is empty'
        )
    areas: dict[str, float] = {'co': a_co, 'cross': a_cross}
    relative = 1.0 / a_cross + (1.0 / a_co if a_co else 0.0)
    ratio = a_co / a_cross
    if normalize:
        n_co = _side_norm(co, 2 * rep_period, window, 'HOM (co)')
        n_cross = _side_norm(cross, 2 * rep_period, window, 'HOM (cross)')
        ratio *= n_cross / n_co
        relative += 1.0 / n_co + 1.0 / n_cross
        areas.update(co_side=n_co, cross_side=n_cross)
    value = 1.0 - ratio
    uncertainty = ratio * math.sqrt(relative)
    logger.info('HOM visibility = %.4f ± %.4f', value, uncertainty)
    return VisibilityResult(value, uncertainty, window, areas)


def _decay(t: np.ndarray, amplitude: float, t1: float,
           offset: float) -> np.ndarray:
    return amplitude * np.exp(-t / t1) + offset


def fit_lifetime(decay: CoincidenceHistogram,
                 fit_range: float = 2e-9) -> Estimate:
    """
    Fit ``A exp(-t/T1) + B`` to the tail of a decay histogram.

    The tail starts one bin past the highest bin and extends over
    ``fit_range``.

    Parameters
    ----------
    decay : CoincidenceHistogram
        A start-stop or cascade cross-correlation histogram.
    fit_range : float
        Length of the fitted tail in seconds.

    Returns
    -------
    Estimate
        The lifetime in seconds and its standard error.

    Raises
    ------
    FitError
        If the tail is shorter than ten bins or does not decay.
    """
    peak = int(np.argmax(decay.counts))
    t = decay.delays - decay.delays[peak]
    tail = (t > decay.bin_width / 2) & (t <= fit_range)
    if tail.sum() < 10:
        raise FitError(
            f'Cannot fit lifetime: only {int(tail.sum())} bins past the peak'
        )
    x = t[tail]
    y = decay.counts[tail].astype(float)
    if y[0] <= y[-1]:
        raise FitError('Cannot fit lifetime: the tail does not decay')
    # 1/e crossing as the starting guess
    below = np.flatnonzero(y - y[-1] < (y[0] - y[-1]) / math.e)
    guess = float(x[below[0]]) if below.size else float(x[-1])
    sigma = np.sqrt(np.maximum(y, 1.0))
    try:
        with warnings.catch_warnings():
            warnings.simplefilter('error', OptimizeWarning)
            popt, pcov = curve_fit(
                _decay, x, y, p0=(y[0], guess, y[-1]), sigma=sigma,
                absolute_sigma=True, maxfev=10_000,
            )
    except (RuntimeError, OptimizeWarning, ValueError) as e:
        raise FitError(f'Cannot fit lifetime: {e}') from e
    t1, error = float(popt[1]), float(np.sqrt(pcov[1, 1]))
    if not (t1 > 0 and math.isfinite(error)):
        raise FitError(f'Cannot fit lifetime: non-decaying tail (T1 = {t1})')
    logger.debug('Lifetime fit parameters: %s', popt)
    logger.info('T1 = %.2f ± %.2f ps', t1 * 1e12, error * 1e12)
    return Estimate(t1, error)


def fit_fss(samples: Sequence[tuple[float, float]]) -> Estimate:
    """
    Fit ``E0 + (FSS/2) cos(2θ + φ)`` to analyzer-angle energy samples.

    The model is linear in ``E0``, ``a = (FSS/2) cos φ`` and
    ``b = -(FSS/2) sin φ`` and is solved by least squares.

    Parameters
    ----------
    samples : Sequence[tuple[float, float]]
        ``(angle in rad, energy in eV)`` pairs.

    Returns
    -------
    Estimate
        The peak-to-peak splitting in eV and its standard error.

    Raises
    ------
    FitError
        If the angles cannot separate the three parameters.
    """
    data = np.asarray(samples, dtype=float).reshape(-1, 2)
    theta, energy = data[:, 0], data[:, 1]
    design = np.column_stack([np.ones_like(theta), np.cos(2 * theta),
                              np.sin(2 * theta)])
    coef, _, rank, _ = np.linalg.lstsq(design, energy, rcond=None)
    if rank < 3 or theta.size < 4:
        raise FitError(
            f'Cannot fit FSS: {theta.size} samples do not determine the '
            'splitting'
        )
    if theta.size < 8 or np.ptp(np.mod(2 * theta, 2 * np.pi)) < np.pi:
        logger.warning('FSS fit from %d samples over a narrow angle range',
                       theta.size)
    residual = energy - design @ coef
    variance = float(residual @ residual) / (theta.size - 3)
    cov = variance * np.linalg.inv(design.T @ design)
    a, b = coef[1], coef[2]
    amplitude = math.hypot(a, b)
    if amplitude > 0:
        grad = np.array([a, b]) / amplitude
        error = 2.0 * math.sqrt(max(float(grad @ cov[1:, 1:] @ grad), 0.0))
    else:
        error = 2.0 * math.sqrt(max(float(np.trace(cov[1:, 1:])) / 2, 0.0))
    logger.info('FSS = %.3f ± %.3f µeV', 2e6 * amplitude, 1e6 * error)
    return Estimate(2.0 * amplitude, error)


__all__ = [
    'Estimate',
    'VisibilityResult',
    'extract_g2',
    'extract_hom_visibility',
    'fit_fss',
    'fit_lifetime',
]
