import cmath
import math
from pathlib import Path

import numpy as np
import pytest
from scipy.integrate import quad

from qdemux import ParameterError
from qdemux.utils import ev_to_hz
from qdemux.visibility import (
    CROSSOVER,
    Eq2Inputs,
    VisibilityMap,
    correct_hom,
    faddeeva,
    visibility_eq2,
    visibility_limit,
    visibility_map,
)


def _series(z: complex) -> complex:
    """Taylor series of w(z), accurate for |z| <= 3."""
    total, n = 0j, 0
    while True:
        term = (1j * z) ** n / math.gamma(n / 2 + 1)
        total += term
        if n > 20 and abs(term) < 1e-18:
            return total
        n += 1


def _continued_fraction(z: complex, depth: int = 400) -> complex:
    """Laplace continued fraction of w(z), accurate for |z| >= 6."""
    tail = z
    for k in range(depth, 0, -1):
        tail = z - (k / 2) / tail
    return 1j / math.sqrt(math.pi) / tail


def _quadrature(z: complex) -> complex:
    """w(z) = i/π ∫ exp(-t²)/(z - t) dt, for Im z > 0."""
    x, y = z.real, z.imag

    def den(t: float) -> float:
        return (x - t) ** 2 + y * y

    re, _ = quad(lambda t: math.exp(-t * t) / den(t), -np.inf, np.inf,
                 epsabs=1e-14, epsrel=1e-12, limit=200)
    im, _ = quad(lambda t: math.exp(-t * t) * (x - t) / den(t), -np.inf,
                 np.inf, epsabs=1e-14, epsrel=1e-12, limit=200)
    return complex(y * re / math.pi, im / math.pi)


def _oracle(z: complex) -> complex:
    if abs(z) <= 3:
        return _series(z)
    if abs(z) >= 6:
        return _continued_fraction(z)
    return _quadrature(z)


def _points() -> list[complex]:
    rng = np.random.default_rng(42)
    near = [cmath.rect(r, phi) for r, phi in zip(
        3 * np.sqrt(rng.random(500)), np.pi * rng.random(500))]
    far = list(rng.uniform(-10, 10, 500) + 1j * rng.uniform(0.5, 10, 500))
    return near + far


class TestCorrectHom:
    """HOM visibility correction"""

    def test_reported(self):
        """it corrects the measured H and V visibilities"""
        assert correct_hom(0.876, 0.028, 0.47, 0.53) \
            == pytest.approx(0.937, abs=1e-3)
        assert correct_hom(0.840, 0.022, 0.47, 0.53) \
            == pytest.approx(0.90, abs=0.015)

    def test_ideal(self):
        """it leaves the visibility of an ideal setup unchanged"""
        for v in (0.0, 0.4, 0.95):
            assert correct_hom(v, 0.0, 0.5, 0.5) == pytest.approx(v)

    def test_monotone(self):
        """it increases with the raw visibility and with g2"""
        values = [correct_hom(v, 0.02, 0.47, 0.53)
                  for v in np.linspace(0, 0.9, 10)]
        assert np.all(np.diff(values) > 0)
        values = [correct_hom(0.8, g2, 0.47, 0.53)
                  for g2 in np.linspace(0, 0.1, 10)]
        assert np.all(np.diff(values) > 0)

    def test_balanced_minimum(self):
        """it corrects least for a balanced splitter"""
        balanced = correct_hom(0.8, 0.02)
        for r in (0.3, 0.45, 0.49, 0.51, 0.7):
            assert correct_hom(0.8, 0.02, r, 1 - r) > balanced

    def test_unclamped(self, caplog: pytest.LogCaptureFixture):
        """it reports corrected values above one without clamping"""
        with caplog.at_level('WARNING', logger='qdemux.visibility'):
            _val = correct_hom(0.99, 0.1, 0.4, 0.6)
        assert _val > 1.0
        assert 'exceeds 1' in caplog.text

    def test_invalid(self):
        """it raises ParameterError outside its domain"""
        with pytest.raises(ParameterError) as err:
            _ = correct_hom(0.8, 1.0, 0.5, 0.5)
        assert 'g2' in str(err.value)
        with pytest.raises(ParameterError) as err:
            _ = correct_hom(0.8, 0.0, 0.0, 1.0)
        assert "'r'" in str(err.value)


class TestFaddeeva:
    """Faddeeva function"""

    def test_origin(self):
        """it is one at the origin"""
        assert faddeeva(0j) == 1 + 0j

    def test_imaginary_axis(self):
        """it equals exp(y²) erfc(y) on the imaginary axis"""
        assert faddeeva(1j).real == pytest.approx(math.e * math.erfc(1),
                                                  rel=1e-12)
        assert faddeeva(1j).real == pytest.approx(0.42758357615580700,
                                                  rel=1e-12)
        for y in (0.1, 2.0, 5.0):
            _val = faddeeva(1j * y)
            assert _val.real == pytest.approx(
                math.exp(y * y) * math.erfc(y), rel=1e-10)
            assert abs(_val.imag) < 1e-15

    def test_off_axis(self):
        """it matches the quadrature oracle off the axes"""
        _val = faddeeva(2 + 1j)
        assert abs(_val - _quadrature(2 + 1j)) < 1e-6 * abs(_val)

    def test_accuracy(self):
        """it is accurate to 1e-6 over the upper half-plane"""
        points = _points()
        values = faddeeva(np.array(points))
        for z, value in zip(points, values):
            expected = _oracle(z)
            assert abs(value - expected) <= 1e-6 * abs(expected), z

    def test_reflection(self):
        """it satisfies w(-conj(z)) = conj(w(z))"""
        points = np.array(_points())
        np.testing.assert_allclose(faddeeva(-points.conj()),
                                   faddeeva(points).conj(), rtol=1e-10)


class TestVisibilityModel:
    """Wandering-averaged visibility"""

    def test_limit(self):
        """it evaluates the lifetime-limited visibility"""
        assert visibility_limit(170e-12, 0.0) == 1.0
        assert visibility_limit(170e-12, 1.693e9) \
            == pytest.approx(0.234, abs=5e-4)
        assert visibility_limit(175e-12, 1.693e9) \
            == pytest.approx(0.224, abs=5e-4)

    def test_reported_bound(self):
        """it bounds the H-V visibility near 25 %"""
        _val = visibility_eq2(Eq2Inputs.from_fss(170e-12, 7.0e-6))
        assert _val == pytest.approx(0.25, abs=0.03)

    def test_identical(self):
        """it returns one for identical emitters"""
        assert visibility_eq2(Eq2Inputs(170e-12, 0.0)) == 1.0
        assert visibility_eq2(Eq2Inputs(170e-12, 0.0, sigma=1.0)) \
            == pytest.approx(1.0)

    def test_upper_bound(self):
        """it never exceeds one for identical emitters"""
        for t1 in np.linspace(20e-12, 500e-12, 200):
            assert visibility_limit(t1, 0.0) <= 1.0
            assert visibility_eq2(Eq2Inputs(t1, 0.0)) <= 1.0
            assert visibility_eq2(Eq2Inputs(t1, 0.0, sigma=1e8)) <= 1.0

    def test_small_sigma(self):
        """it falls back to the limit for vanishing wandering"""
        inputs = Eq2Inputs(170e-12, 1.693e9, sigma=1e3)
        assert visibility_eq2(inputs) == pytest.approx(
            visibility_limit(170e-12, 1.693e9), rel=1e-4)

    def test_crossover(self):
        """it is continuous across the crossover"""
        t1, delta_nu = 170e-12, 1.693e9
        edge = 2 * math.pi * delta_nu / CROSSOVER
        below = visibility_eq2(Eq2Inputs(t1, delta_nu, edge * 0.999999))
        above = visibility_eq2(Eq2Inputs(t1, delta_nu, edge * 1.000001))
        assert above == pytest.approx(below, abs=1e-6)

    def test_consistency(self):
        """it approaches the limit as the wandering vanishes"""
        for t1 in np.linspace(20e-12, 500e-12, 20):
            for fss in np.linspace(0, 20e-6, 20):
                inputs = Eq2Inputs.from_fss(t1, fss)
                small = Eq2Inputs(t1, inputs.delta_nu, inputs.rate * 1e-3)
                limit = visibility_limit(t1, inputs.delta_nu)
                assert abs(visibility_eq2(small) - limit) < 1e-3 * limit

    def test_monte_carlo(self):
        """it averages the overlap over Gaussian wandering"""
        t1, delta_nu, sigma = 170e-12, 1.693e9, 0.5e9
        rng = np.random.default_rng(17)
        detuning = delta_nu + rng.normal(0, sigma, 10**6)
        samples = 1 / (1 + (2 * np.pi * detuning * t1) ** 2)
        error = samples.std() / math.sqrt(samples.size)
        _val = visibility_eq2(Eq2Inputs(t1, delta_nu, sigma))
        assert abs(_val - samples.mean()) < 3 * error
        assert _val > visibility_limit(t1, delta_nu)

    def test_dephasing(self):
        """it lowers the visibility with pure dephasing"""
        pure = Eq2Inputs.from_fss(170e-12, 0.0, pure_dephasing=1e9)
        assert pure.rate == pytest.approx(1 / 170e-12 + 1e9)
        assert visibility_eq2(pure) == pytest.approx(
            (1 / 170e-12) / (1 / 170e-12 + 1e9))

    def test_invalid(self):
        """it raises ParameterError for invalid inputs"""
        with pytest.raises(ParameterError) as err:
            _ = Eq2Inputs(0.0, 1e9)
        assert "'t1'" in str(err.value)
        with pytest.raises(ParameterError) as err:
            _ = Eq2Inputs(1e-10, 1e9, sigma=-1.0)
        assert "'sigma'" in str(err.value)


class TestVisibilityMap:
    """Lifetime × FSS visibility map"""

    @pytest.fixture
    def grid(self):
        return visibility_map(np.linspace(20e-12, 500e-12, 200),
                              np.linspace(0.0, 20e-6, 200))

    def test_shape(self, grid: VisibilityMap):
        """it evaluates the Cartesian product of the axes"""
        assert grid.values.shape == (200, 200)
        assert np.all((grid.values > 0) & (grid.values <= 1))

    def test_no_splitting(self, grid: VisibilityMap):
        """it equals one without a splitting"""
        np.testing.assert_allclose(grid.values[:, 0], 1.0, atol=1e-9)

    def test_monotone(self, grid: VisibilityMap):
        """it decreases with the splitting and with the lifetime"""
        assert np.all(np.diff(grid.values, axis=1) < 0)
        assert np.all(np.diff(grid.values[:, 1:], axis=0) < 0)

    def test_line_cut(self, grid: VisibilityMap):
        """it crosses 25 % near 7 µeV at 170 ps"""
        cut = grid.line_cut(170e-12)
        assert np.all(np.diff(cut) < 0)
        at_7 = np.interp(7.0e-6, grid.fss, cut)
        assert at_7 == pytest.approx(0.25, abs=0.03)
        assert visibility_eq2(Eq2Inputs.from_fss(170e-12, 7.0e-6)) \
            == pytest.approx(at_7, abs=1e-3)

    def test_wandering(self):
        """it lowers the visibility with spectral wandering"""
        t1, fss = [100e-12, 200e-12], [0.0, 1e-6]
        sharp = visibility_map(t1, fss)
        broad = visibility_map(t1, fss, sigma=1e9)
        assert np.all(broad.values < sharp.values)
        assert broad.values[0, 1] == pytest.approx(visibility_eq2(
            Eq2Inputs(100e-12, ev_to_hz(1e-6), 1e9)))

    def test_threads(self):
        """it gives the same grid for any number of threads"""
        t1, fss = np.linspace(50e-12, 300e-12, 30), np.linspace(0, 1e-5, 7)
        one = visibility_map(t1, fss, sigma=0.2e9)
        many = visibility_map(t1, fss, sigma=0.2e9, threads=4)
        np.testing.assert_array_equal(one.values, many.values)

    def test_table(self, tmp_path: Path):
        """it writes t1-fss-visibility rows"""
        target = tmp_path / 'map.txt'
        visibility_map([170e-12, 175e-12], [0.0, 7e-6]).to_table(
            target, {'seed': 1})
        lines = target.read_text().splitlines()
        assert lines[1] == '# t1_ps fss_ueV visibility'
        assert len(lines) == 6
        assert lines[2].split()[:2] == ['170', '0']

    def test_invalid(self):
        """it raises ParameterError for ranges that do not increase"""
        with pytest.raises(ParameterError) as err:
            _ = visibility_map([2e-10, 1e-10], [0.0, 1e-6])
        assert 't1_range' in str(err.value)
        with pytest.raises(ParameterError) as err:
            _ = visibility_map([1e-10], [1e-6, 1e-6])
        assert 'fss_range' in str(err.value)
