"""Coincidence histogramming: kernel parity, binning convention, defaults."""
import numpy as np
import pytest

from sqcorr import (
    EmptyChannelError,
    InvalidParameterError,
    LASER_PERIOD_PS,
    TagStream,
    coincidence_histogram_2,
    coincidence_histogram_3,
)
from sqcorr import _kernels_py
from sqcorr._backend import BACKEND
from sqcorr.histograms import histogram2d_to_csv, histogram_to_csv

cy = pytest.importorskip("sqcorr._kernels_cy")


def _stream(*channels):
    arrs = tuple(np.asarray(c, dtype=np.int64) for c in channels)
    return TagStream(channel_count=len(arrs), by_channel=arrs)


def test_compiled_backend_active():
    assert BACKEND == "cython"


@pytest.mark.parametrize("seed", [0, 1, 2])
@pytest.mark.parametrize("nbins", [3, 51, 501])
def test_hist1d_backend_parity(seed, nbins):
    rng = np.random.default_rng(seed)
    ta = np.sort(rng.integers(-10**7, 10**7, 4000)).astype(np.int64)
    tb = np.sort(rng.integers(-10**7, 10**7, 5000)).astype(np.int64)
    a = _kernels_py.hist1d(ta, tb, 100, nbins)
    b = cy.hist1d(ta, tb, 100, nbins)
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("seed", [3, 4])
@pytest.mark.parametrize("nbins", [5, 27])
def test_hist2d_backend_parity(seed, nbins):
    rng = np.random.default_rng(seed)
    t0 = np.sort(rng.integers(0, 10**7, 2000)).astype(np.int64)
    t1 = np.sort(rng.integers(0, 10**7, 2500)).astype(np.int64)
    t2 = np.sort(rng.integers(0, 10**7, 1500)).astype(np.int64)
    a = _kernels_py.hist2d(t0, t1, t2, 999, nbins)
    b = cy.hist2d(t0, t1, t2, 999, nbins)
    np.testing.assert_array_equal(a, b)


def test_anchor_chunking_invariance(rng):
    ta = np.sort(rng.integers(0, 10**8, 3000)).astype(np.int64)
    tb = np.sort(rng.integers(0, 10**8, 3000)).astype(np.int64)
    tags = _stream(ta, tb)
    full = coincidence_histogram_2(tags, 0, 1, 100, 300_000.0)
    chunked = coincidence_histogram_2(tags, 0, 1, 100, 300_000.0, chunk_anchors=137)
    np.testing.assert_array_equal(full.counts, chunked.counts)


def test_identical_streams_fill_central_bin():
    t = np.arange(0, 10**6, 1000, dtype=np.int64)
    h = coincidence_histogram_2(_stream(t, t), 0, 1, 100, 550.0)
    assert h.nbins == 11
    assert h.counts[5] == t.size
    assert h.counts.sum() == t.size


def test_binning_convention_half_open_edges():
    """Bin k covers [k*w - w/2, k*w + w/2): delay -50 lands in the zero bin."""
    ta = np.zeros(1, dtype=np.int64)
    tb = np.array([-51, -50, 49, 50], dtype=np.int64)
    h = coincidence_histogram_2(_stream(ta, tb), 0, 1, 100, 150.0)
    # window [-150, 150) -> 3 bins centered -100, 0, 100
    np.testing.assert_array_equal(h.counts, [1, 2, 1])


def test_delays_outside_window_dropped():
    ta = np.zeros(2, dtype=np.int64)
    tb = np.array([-10**6, 10**6], dtype=np.int64)
    h = coincidence_histogram_2(_stream(ta, tb), 0, 1, 100, 500.0)
    assert h.counts.sum() == 0


def test_peak_spacing_matches_period(rng):
    period = round(LASER_PERIOD_PS)
    pulses = np.arange(0, 4000, dtype=np.int64) * period
    keep_a = rng.random(4000) < 0.5
    keep_b = rng.random(4000) < 0.5
    tags = _stream(pulses[keep_a], pulses[keep_b])
    h = coincidence_histogram_2(tags, 0, 1)
    centers = h.bin_centers()
    occupied = np.sort(centers[h.counts > 0])
    spacing = np.diff(occupied)
    assert np.all(np.abs(spacing - period) <= h.bin_width_ps)


def test_default_window_covers_25_periods():
    t = np.array([0], dtype=np.int64)
    h = coincidence_histogram_2(_stream(t, t), 0, 1)
    assert h.range_ps >= 25.0 * LASER_PERIOD_PS
    m = int(h.range_ps // LASER_PERIOD_PS)
    assert m == 25


def test_bin_width_must_divide_period():
    t = np.array([0, 10], dtype=np.int64)
    with pytest.raises(InvalidParameterError):
        coincidence_histogram_2(_stream(t, t), 0, 1, bin_width_ps=10_000)


def test_empty_channel_rejected():
    tags = _stream(np.array([1, 2], dtype=np.int64), np.empty(0, dtype=np.int64))
    with pytest.raises(EmptyChannelError):
        coincidence_histogram_2(tags, 0, 1)


def test_hist2d_counts_triples():
    period = round(LASER_PERIOD_PS)
    t = np.arange(0, 50, dtype=np.int64) * period
    h = coincidence_histogram_3(_stream(t, t, t), 0, 1, 2)
    half = h.nbins // 2
    assert h.counts[half, half] == 50
    # off-diagonal satellite (t1 ahead by one period, t2 on time)
    k = half + int(round(period / h.bin_width_ps))
    assert h.counts[k, half] == 49


def test_histogram_csv_round_trip(tmp_path):
    t = np.arange(0, 10**5, 1000, dtype=np.int64)
    h = coincidence_histogram_2(_stream(t, t), 0, 1, 100, 550.0)
    out = tmp_path / "h.csv"
    histogram_to_csv(h, out)
    lines = out.read_text().splitlines()
    assert lines[0] == "delay_ps,counts"
    assert len(lines) == h.nbins + 1
    data = np.loadtxt(out, delimiter=",", skiprows=1, dtype=np.int64)
    np.testing.assert_array_equal(data[:, 1], h.counts)


def test_histogram2d_csv_sparse(tmp_path):
    period = round(LASER_PERIOD_PS)
    t = np.arange(0, 20, dtype=np.int64) * period
    h = coincidence_histogram_3(_stream(t, t, t), 0, 1, 2)
    out = tmp_path / "h2.csv"
    histogram2d_to_csv(h, out)
    lines = out.read_text().splitlines()
    assert lines[0] == "delay1_ps,delay2_ps,counts"
    total = sum(int(l.split(",")[2]) for l in lines[1:])
    assert total == h.counts.sum()
