"""
Closed-form model of the biexciton-exciton cascade.

The four-level system (ground, H-exciton, V-exciton, biexciton) is reduced
to the three probabilities the simulator needs: preparing the biexciton
with a two-photon excitation pulse, stimulating the biexciton decay with a
delayed pulse, and the polarization branch of the cascade.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np
import numpy.typing as npt
from scipy.special import ndtr

from .errors import ParameterError
from .utils import (
    SPEED_OF_LIGHT,
    check_positive,
    check_probability,
    ev_to_hz,
    wavelength_to_ev,
)

#: Two-photon excitation resonance in metres.
TPE_RESONANCE = 780.3e-9

#: Exciton emission line in metres.
X_WAVELENGTH = 779.4e-9

#: FWHM of a Gaussian divided by its standard deviation.
FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


class Polarization(IntEnum):
    """Linear polarization of a pulse or photon."""

    H = 0
    V = 1

    def orthogonal(self) -> Polarization:
        """Return the orthogonal polarization."""
        return Polarization(1 - self)


@dataclass(frozen=True)
class QdParameters:
    """
    Physical parameters of the quantum dot.

    Attributes
    ----------
    t1_x : float
        Exciton lifetime in seconds.
    t1_xx : float
        Biexciton lifetime in seconds.
    fss : float
        Fine-structure splitting in eV.
    sigma : float
        Standard deviation of the relative center-frequency offset of two
        photons caused by spectral wandering, in Hz.
    gamma : float | None
        Dephasing rate in Hz, ``1/t1_x + pure_dephasing`` when ``None``.
    pure_dephasing : float
        Additive pure-dephasing rate in Hz.
    prep_fidelity : float
        Probability that a π pulse prepares the biexciton.
    stim_fidelity : float
        Probability that a stimulated decay follows the stim polarization.
    reexcitation_prob : float
        Per-cycle probability of a spurious second exciton photon.
    detuning_scale : float | None
        Interaction time in seconds converting a drive detuning into a
        rotation-angle detuning; the pulse duration when ``None``.
    """

    t1_x: float = 175e-12
    t1_xx: float = 120e-12
    fss: float = 7.0e-6
    sigma: float = 0.0
    gamma: float | None = None
    pure_dephasing: float = 0.0
    prep_fidelity: float = 1.0
    stim_fidelity: float = 1.0
    reexcitation_prob: float = 0.0
    detuning_scale: float | None = None

    def __post_init__(self) -> None:
        check_positive('t1_x', self.t1_x)
        check_positive('t1_xx', self.t1_xx)
        check_positive('fss', self.fss, strict=False)
        check_positive('sigma', self.sigma, strict=False)
        check_positive('pure_dephasing', self.pure_dephasing, strict=False)
        if self.gamma is not None:
            check_positive('gamma', self.gamma)
        if self.detuning_scale is not None:
            check_positive('detuning_scale', self.detuning_scale)
        check_probability('prep_fidelity', self.prep_fidelity)
        check_probability('stim_fidelity', self.stim_fidelity)
        check_probability('reexcitation_prob', self.reexcitation_prob)

    @property
    def dephasing_rate(self) -> float:
        """`float` : The dephasing rate γ in Hz."""
        if self.gamma is not None:
            return self.gamma
        return 1.0 / self.t1_x + self.pure_dephasing

    @property
    def fss_hz(self) -> float:
        """`float` : The fine-structure splitting as a frequency."""
        return ev_to_hz(self.fss)


@dataclass(frozen=True)
class PulseParameters:
    """
    A laser pulse.

    Attributes
    ----------
    area : float
        Pulse area in units of π.
    detuning : float
        Detuning of the drive from its resonance in Hz.
    duration : float
        Intensity FWHM in seconds.
    wavelength : float | None
        Central wavelength in metres; metadata only.
    """

    area: float = 1.0
    detuning: float = 0.0
    duration: float = 3e-12
    wavelength: float | None = None

    def __post_init__(self) -> None:
        check_positive('area', self.area, strict=False)
        check_positive('duration', self.duration)
        if not math.isfinite(self.detuning):
            raise ParameterError(
                f"Invalid value: 'detuning' must be finite, "
                f'got {self.detuning}'
            )

    @property
    def sigma(self) -> float:
        """`float` : Standard deviation of the intensity envelope."""
        return self.duration / FWHM_PER_SIGMA


def _rabi(area: npt.ArrayLike, delta: npt.ArrayLike,
          fidelity: float) -> npt.NDArray[np.float64]:
    omega = np.pi * np.asarray(area, dtype=float)
    delta = np.asarray(delta, dtype=float)
    generalized = np.hypot(omega, delta)
    weight = np.divide(omega ** 2, generalized ** 2,
                       out=np.zeros(np.broadcast(omega, delta).shape),
                       where=generalized > 0)
    result = fidelity * weight * np.sin(generalized / 2.0) ** 2
    return np.clip(result, 0.0, 1.0)


def prepare_biexciton_probability(pulse: PulseParameters,
                                  qd: QdParameters) -> float:
    """
    Return the probability that a pulse prepares the biexciton.

    A generalized two-level Rabi formula with Ω = area·π and a rotation
    detuning Δ = 2π·detuning·τ, where τ is ``qd.detuning_scale`` (or the
    pulse duration).

    Parameters
    ----------
    pulse : PulseParameters
        The two-photon excitation pulse.
    qd : QdParameters
        The quantum dot.

    Returns
    -------
    float
        The preparation probability in ``[0, 1]``.

    Examples
    --------
    >>> prepare_biexciton_probability(PulseParameters(area=1.0), qd)
    1.0
    """
    scale = qd.detuning_scale or pulse.duration
    delta = 2.0 * np.pi * pulse.detuning * scale
    return float(_rabi(pulse.area, delta, qd.prep_fidelity))


def rabi_map(areas: npt.ArrayLike, detunings: npt.ArrayLike,
             qd: QdParameters,
             duration: float = 3e-12) -> npt.NDArray[np.float64]:
    """
    Evaluate the preparation probability over a grid.

    Parameters
    ----------
    areas : ArrayLike
        Pulse areas in units of π (rows).
    detunings : ArrayLike
        Drive detunings in Hz (columns).
    qd : QdParameters
        The quantum dot.
    duration : float
        Pulse FWHM used when ``qd.detuning_scale`` is not set.

    Returns
    -------
    NDArray[float64]
        Array of shape ``(len(areas), len(detunings))``.
    """
    scale = qd.detuning_scale or duration
    area = np.asarray(areas, dtype=float)[:, np.newaxis]
    delta = 2.0 * np.pi * np.asarray(detunings, dtype=float)[np.newaxis, :]
    return _rabi(area, delta * scale, qd.prep_fidelity)


def wavelength_to_detuning(wavelength: float,
                           resonance: float = TPE_RESONANCE) -> float:
    """Return the optical detuning in Hz of a wavelength from resonance."""
    return SPEED_OF_LIGHT / wavelength - SPEED_OF_LIGHT / resonance


def stim_efficiency(delta_t: float, stim_pulse: PulseParameters,
                    qd: QdParameters,
                    tpe_pulse: PulseParameters | None = None) -> float:
    """
    Return the probability that the stim pulse triggers the biexciton decay.

    The rise is the Gaussian CDF of the cross-correlation of the two pulse
    envelopes; past the TPE pulse the biexciton population decays with
    ``qd.t1_xx`` before the stim pulse arrives.

    Parameters
    ----------
    delta_t : float
        Delay of the stim pulse after the TPE pulse in seconds; negative
        when the stim pulse comes first.
    stim_pulse : PulseParameters
        The stimulation pulse.
    qd : QdParameters
        The quantum dot.
    tpe_pulse : PulseParameters | None
        The excitation pulse; assumed as long as the stim pulse if omitted.

    Returns
    -------
    float
        The stimulation efficiency η in ``[0, 1]``.
    """
    tpe_sigma = stim_pulse.sigma if tpe_pulse is None else tpe_pulse.sigma
    width = math.hypot(stim_pulse.sigma, tpe_sigma)
    rise = float(ndtr(delta_t / width))
    decay = math.exp(-max(delta_t, 0.0) / qd.t1_xx)
    return min(max(rise * decay, 0.0), 1.0)


def branch_polarization(stim_success: bool, stim_pol: Polarization,
                        qd: QdParameters,
                        rng: np.random.Generator) -> Polarization:
    """
    Draw the polarization branch of one cascade.

    Parameters
    ----------
    stim_success : bool
        Whether the stim pulse triggered the decay.
    stim_pol : Polarization
        The polarization of the stim pulse.
    qd : QdParameters
        The quantum dot; ``stim_fidelity`` is used.
    rng : Generator
        The random source.

    Returns
    -------
    Polarization
        The stim polarization with probability ``stim_fidelity`` after a
        stimulated decay, otherwise H or V with equal probability.
    """
    branch = draw_branches(np.array([stim_success]), stim_pol, qd, rng)
    return Polarization(int(branch[0]))


def draw_branches(stim_success: npt.NDArray[np.bool_],
                  stim_pol: Polarization | npt.NDArray[np.int8],
                  qd: QdParameters,
                  rng: np.random.Generator) -> npt.NDArray[np.int8]:
    """Vectorized :func:`branch_polarization`."""
    stim_pol = np.broadcast_to(np.asarray(stim_pol, dtype=np.int8),
                               stim_success.shape)
    unbiased = rng.random(stim_success.shape) < 0.5
    followed = rng.random(stim_success.shape) < qd.stim_fidelity
    stimulated = np.where(followed, stim_pol, 1 - stim_pol)
    return np.where(stim_success, stimulated,
                    unbiased.astype(np.int8)).astype(np.int8)


def reexcitation_for_g2(g2: float) -> float:
    """
    Return the re-excitation probability that yields a given g²(0).

    A cycle emitting one photon, plus a second one with probability ``p``,
    has g²(0) = 2p / (1 + p)².

    Raises
    ------
    ParameterError
        If ``g2`` is outside ``[0, 0.5]``.

    Examples
    --------
    >>> round(reexcitation_for_g2(0.028), 5)
    0.01439
    """
    if not 0.0 <= g2 <= 0.5:
        raise ParameterError(f'Invalid g2 target: must be in [0, 0.5], '
                             f'got {g2}')
    if g2 == 0.0:
        return 0.0
    return ((1.0 - g2) - math.sqrt(1.0 - 2.0 * g2)) / g2


def fss_scan(qd: QdParameters, angles: npt.ArrayLike, noise: float,
             rng: np.random.Generator, phase: float = 0.0
             ) -> list[tuple[float, float]]:
    """
    Simulate a polarization-resolved measurement of the exciton line.

    Parameters
    ----------
    qd : QdParameters
        The quantum dot.
    angles : ArrayLike
        Analyzer angles in radians.
    noise : float
        Standard deviation of the energy readout in eV.
    rng : Generator
        The random source.
    phase : float
        Orientation of the exciton dipoles in radians.

    Returns
    -------
    list[tuple[float, float]]
        ``(angle, energy)`` samples.
    """
    theta = np.asarray(angles, dtype=float)
    energy = wavelength_to_ev(X_WAVELENGTH) \
        + qd.fss / 2.0 * np.cos(2.0 * theta + phase) \
        + rng.normal(0.0, noise, theta.shape)
    return list(zip(theta.tolist(), energy.tolist()))


__all__ = [
    'FWHM_PER_SIGMA',
    'Polarization',
    'PulseParameters',
    'QdParameters',
    'TPE_RESONANCE',
    'X_WAVELENGTH',
    'branch_polarization',
    'draw_branches',
    'fss_scan',
    'prepare_biexciton_probability',
    'rabi_map',
    'reexcitation_for_g2',
    'stim_efficiency',
    'wavelength_to_detuning',
]
