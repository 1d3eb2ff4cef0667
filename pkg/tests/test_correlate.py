import time
from pathlib import Path

import numpy as np
import pytest

from qdemux import DataError, ParameterError
from qdemux.correlate import CoincidenceHistogram, cross_correlate
from qdemux.timetags import TimeTagStream


@pytest.fixture
def poisson():
    """Two independent 1 MHz Poisson streams over 100 ms."""
    rng = np.random.default_rng(77)
    duration = 0.1
    streams = []
    for channel in (1, 2):
        n = rng.poisson(1e6 * duration)
        tags = np.sort(rng.integers(0, int(duration * 1e12), n))
        streams.append(TimeTagStream(channel, tags, duration))
    return streams


def _naive(a: np.ndarray, b: np.ndarray, bin_ps: int,
           half_bins: int) -> np.ndarray:
    delays = (b[np.newaxis, :] - a[:, np.newaxis]).ravel()
    q = (2 * np.abs(delays) + bin_ps) // (2 * bin_ps)
    index = np.where(delays >= 0, half_bins + q, half_bins - q)
    index = index[q <= half_bins]
    return np.bincount(index, minlength=2 * half_bins + 1)


class TestCrossCorrelate:
    """Coincidence correlator"""

    def test_single_pair(self):
        """it bins a single pair at its delay"""
        h = cross_correlate([0], [100], bin_width=100e-12, span=1e-9)
        assert len(h) == 21
        assert h.total_pairs == 1
        assert h.counts[11] == 1
        assert h.delays[11] == pytest.approx(100e-12)
        assert h.area(100e-12, 100e-12) == 1

    def test_geometry(self):
        """it centers the bins on the multiples of the bin width"""
        h = cross_correlate([], [], bin_width=50e-12, span=100e-9)
        assert len(h) == 4001
        assert h.min_delay == pytest.approx(-100.025e-9)
        assert h.max_delay == pytest.approx(100.025e-9)
        assert h.delays[2000] == pytest.approx(0.0, abs=1e-18)
        assert h.total_pairs == 0

    def test_delta(self):
        """it puts a delayed copy of a stream in one bin"""
        rng = np.random.default_rng(3)
        a = np.unique(rng.integers(0, 10**9, 2000)) * 10_000
        h = cross_correlate(a, a + 500, bin_width=100e-12, span=2e-9)
        assert h.area(500e-12, 100e-12) == len(a)
        assert h.total_pairs == len(a)

    def test_naive(self):
        """it agrees with the all-pairs histogram"""
        rng = np.random.default_rng(5)
        a = np.sort(rng.integers(0, 200_000, 400))
        b = np.sort(rng.integers(0, 200_000, 300))
        h = cross_correlate(a, b, bin_width=50e-12, span=5e-9)
        np.testing.assert_array_equal(h.counts, _naive(a, b, 50, 100))

    def test_mirrored(self):
        """it mirrors when the streams are swapped"""
        rng = np.random.default_rng(8)
        a = np.sort(rng.integers(0, 10**7, 5000))
        b = np.sort(rng.integers(0, 10**7, 5000))
        ab = cross_correlate(a, b, bin_width=50e-12, span=20e-9)
        ba = cross_correlate(b, a, bin_width=50e-12, span=20e-9)
        np.testing.assert_array_equal(ab.mirrored().counts, ba.counts)
        assert ab.mirrored().min_delay == pytest.approx(ba.min_delay)
        assert ab.total_pairs == ba.total_pairs

    def test_autocorrelation(self):
        """it skips self-pairs when correlating a stream with itself"""
        stream = TimeTagStream(1, [0, 1000, 5000])
        h = cross_correlate(stream, stream, bin_width=1e-9, span=10e-9)
        assert h.area(0.0, 1e-9) == 0
        assert h.total_pairs == 6
        np.testing.assert_array_equal(h.counts, h.counts[::-1])

    def test_coincident_tags(self):
        """it keeps distinct tags with equal timestamps"""
        stream = TimeTagStream(1, [100, 100])
        h = cross_correlate(stream, stream, bin_width=1e-9, span=1e-9)
        assert h.area(0.0, 1e-9) == 2

    def test_copied_stream(self):
        """it treats an identical copy of a stream as the stream itself"""
        tags = [0, 1000, 5000]
        h = cross_correlate(TimeTagStream(1, tags), TimeTagStream(1, tags),
                            bin_width=1e-9, span=10e-9)
        assert h.area(0.0, 1e-9) == 0
        assert h.total_pairs == 6
        other = cross_correlate(TimeTagStream(1, tags),
                                TimeTagStream(2, tags),
                                bin_width=1e-9, span=10e-9)
        assert other.area(0.0, 1e-9) == 3
        assert other.total_pairs == 9

    def test_throughput(self):
        """it correlates two 10⁷-tag streams quickly for any thread count"""
        rng = np.random.default_rng(21)
        n, duration = 10**7, 1.0
        a, b = (np.sort(rng.integers(0, int(duration * 1e12), n))
                for _ in range(2))
        start = time.perf_counter()
        one = cross_correlate(a, b, bin_width=50e-12, span=100e-9)
        assert time.perf_counter() - start < 10.0
        many = cross_correlate(a, b, bin_width=50e-12, span=100e-9,
                               threads=4)
        np.testing.assert_array_equal(one.counts, many.counts)
        assert one.total_pairs == many.total_pairs
        mean = n * n / duration * 50e-12
        assert one.total_pairs == pytest.approx(mean * len(one), rel=0.01)

    def test_poisson(self, poisson: list[TimeTagStream]):
        """it builds a flat histogram for independent streams"""
        a, b = poisson
        h = cross_correlate(a, b, bin_width=1e-9, span=100e-9)
        mean = len(a) * len(b) / a.duration * 1e-9
        assert h.counts.mean() == pytest.approx(mean, rel=0.03)
        assert np.all(np.abs(h.counts - mean) < 5 * np.sqrt(mean))

    def test_threads(self, poisson: list[TimeTagStream],
                     monkeypatch: pytest.MonkeyPatch):
        """it gives the same histogram for any chunking"""
        a, b = poisson
        whole = cross_correlate(a, b, span=20e-9)
        monkeypatch.setattr('qdemux.correlate.CHUNK_TAGS', 1000)
        chunked = cross_correlate(a, b, span=20e-9, threads=4)
        np.testing.assert_array_equal(whole.counts, chunked.counts)
        assert whole.total_pairs == chunked.total_pairs

    def test_unsorted(self):
        """it raises DataError for unsorted tags"""
        with pytest.raises(DataError) as err:
            _ = cross_correlate([5, 1], [1, 2])
        assert 'not sorted' in str(err.value)

    def test_invalid_binning(self):
        """it raises ParameterError for a sub-picosecond bin"""
        with pytest.raises(ParameterError) as err:
            _ = cross_correlate([0], [1], bin_width=1e-13)
        assert 'bin width' in str(err.value)


class TestCoincidenceHistogram:
    """Coincidence histogram"""

    def test_bin_count(self):
        """it raises DataError when the bins do not span the range"""
        with pytest.raises(DataError) as err:
            _ = CoincidenceHistogram(1.0, 0.0, 10.0, np.zeros(9))
        assert 'do not span' in str(err.value)

    def test_negative(self):
        """it raises DataError for negative counts"""
        with pytest.raises(DataError) as err:
            _ = CoincidenceHistogram(1.0, 0.0, 2.0, np.array([1, -1]))
        assert 'negative' in str(err.value)

    def test_area(self):
        """it integrates half-open windows on the bin grid"""
        h = CoincidenceHistogram(1.0, -2.5, 2.5, np.array([1, 2, 4, 8, 16]))
        assert h.area(0.0, 1.0) == 4
        assert h.area(0.0, 3.0) == 14
        assert h.area(0.5, 2.0) == 12
        with pytest.raises(DataError) as err:
            _ = h.area(2.0, 2.0)
        assert 'does not cover' in str(err.value)

    def test_add(self):
        """it adds histograms with the same bins"""
        h = CoincidenceHistogram(1.0, -1.5, 1.5, np.array([1, 2, 3]), 6)
        total = h + h
        np.testing.assert_array_equal(total.counts, [2, 4, 6])
        assert total.total_pairs == 12
        other = CoincidenceHistogram(2.0, -3.0, 3.0, np.array([1, 2, 3]))
        with pytest.raises(DataError) as err:
            _ = h + other
        assert 'different bins' in str(err.value)

    def test_table(self, tmp_path: Path):
        """it writes and reads delay-count tables"""
        h = cross_correlate([0, 300], [100, 250], bin_width=50e-12,
                            span=1e-9)
        target = tmp_path / 'h.txt'
        h.to_table(target, {'seed': 4})
        lines = target.read_text().splitlines()
        assert '"seed": 4' in lines[0]
        assert lines[1] == '# delay_ps counts'
        assert lines[2] == '-1000 0'
        loaded = CoincidenceHistogram.read(target)
        np.testing.assert_array_equal(loaded.counts, h.counts)
        assert loaded.total_pairs == h.total_pairs

    def test_read_invalid(self, tmp_path: Path):
        """it raises DataError for foreign tables"""
        target = tmp_path / 'h.txt'
        target.write_text('0 1\n')
        with pytest.raises(DataError) as err:
            _ = CoincidenceHistogram.read(target)
        assert 'Not a histogram' in str(err.value)
