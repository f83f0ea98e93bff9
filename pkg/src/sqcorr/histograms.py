"""Coincidence histograms over time-tag streams.

Delays are binned into an odd number of bins centered on integer multiples of
the bin width, so the zero-delay peak and every satellite peak sit on a bin
center. Anchors are processed in chunks to bound memory; partial histograms
add, so the result is independent of the chunk size. Streams too large for
memory would chunk both channels with overlap equal to the window; the reader
here holds channels in memory, so anchor chunking alone is exact.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .constants import LASER_PERIOD_PS
from .exceptions import EmptyChannelError, InvalidParameterError
from .tags import TagStream

DEFAULT_BIN_PS = 100
DEFAULT_WINDOW_PERIODS = 25
DEFAULT_BIN2D_PS = int(LASER_PERIOD_PS / 26)
DEFAULT_WINDOW2D_PERIODS = 4
_CHUNK_ANCHORS = 1 << 20


@dataclass
class Histogram1D:
    """Delay histogram: counts per bin, bins centered on multiples of bin_width_ps."""

    bin_width_ps: int
    counts: np.ndarray
    acquisition_s: float

    @property
    def nbins(self) -> int:
        return int(self.counts.size)

    def bin_centers(self) -> np.ndarray:
        half = self.nbins // 2
        return (np.arange(self.nbins, dtype=np.int64) - half) * self.bin_width_ps

    @property
    def range_ps(self) -> int:
        # covered range is +-(half*bin + bin//2)
        return (self.nbins // 2) * self.bin_width_ps + self.bin_width_ps // 2


@dataclass
class Histogram2D:
    """Pair-delay histogram: counts[k1, k2] over (t1-t0, t2-t0)."""

    bin_width_ps: int
    counts: np.ndarray
    acquisition_s: float

    @property
    def nbins(self) -> int:
        return int(self.counts.shape[0])

    def bin_centers(self) -> np.ndarray:
        half = self.nbins // 2
        return (np.arange(self.nbins, dtype=np.int64) - half) * self.bin_width_ps


def _check_bin(bin_width_ps: int, period_ps: float) -> None:
    if bin_width_ps < 1:
        raise InvalidParameterError(f"bin width must be >= 1 ps, got {bin_width_ps}")
    ratio = period_ps / bin_width_ps
    if abs(ratio - round(ratio)) / ratio > 1e-3:
        raise InvalidParameterError(
            f"bin width {bin_width_ps} ps does not divide the period "
            f"{period_ps:.2f} ps within 0.1%"
        )


def _nbins(range_ps: float, bin_width_ps: int) -> int:
    return 2 * int(range_ps // bin_width_ps) + 1


def _acquisition_s(channels) -> float:
    lo = min(int(ch[0]) for ch in channels if ch.size)
    hi = max(int(ch[-1]) for ch in channels if ch.size)
    return (hi - lo) / 1e12


def _get_channel(tags: TagStream, index: int) -> np.ndarray:
    ch = tags.channel(index)
    if ch.size == 0:
        raise EmptyChannelError(f"channel {index} has no tags")
    return np.ascontiguousarray(ch, dtype=np.int64)


def coincidence_histogram_2(
    tags: TagStream,
    ch_a: int,
    ch_b: int,
    bin_width_ps: int = DEFAULT_BIN_PS,
    range_ps: float | None = None,
    *,
    period_ps: float = LASER_PERIOD_PS,
    chunk_anchors: int = _CHUNK_ANCHORS,
) -> Histogram1D:
    """Histogram of delays t_b - t_a within +-range_ps (default 25.5 periods)."""
    _check_bin(bin_width_ps, period_ps)
    if range_ps is None:
        range_ps = (DEFAULT_WINDOW_PERIODS + 0.5) * period_ps
    ta = _get_channel(tags, ch_a)
    tb = _get_channel(tags, ch_b)
    nbins = _nbins(range_ps, bin_width_ps)
    counts = np.zeros(nbins, dtype=np.int64)
    for s in range(0, ta.size, chunk_anchors):
        counts += _backend.hist1d(ta[s : s + chunk_anchors], tb, bin_width_ps, nbins)
    return Histogram1D(bin_width_ps, counts, _acquisition_s((ta, tb)))


def coincidence_histogram_3(
    tags: TagStream,
    ch_a: int,
    ch_b: int,
    ch_c: int,
    bin_width_ps: int = DEFAULT_BIN2D_PS,
    range_ps: float | None = None,
    *,
    period_ps: float = LASER_PERIOD_PS,
    chunk_anchors: int = _CHUNK_ANCHORS,
) -> Histogram2D:
    """2D histogram of (t_b - t_a, t_c - t_a) within +-range_ps (default 4.5 periods)."""
    _check_bin(bin_width_ps, period_ps)
    if range_ps is None:
        range_ps = (DEFAULT_WINDOW2D_PERIODS + 0.5) * period_ps
    t0 = _get_channel(tags, ch_a)
    t1 = _get_channel(tags, ch_b)
    t2 = _get_channel(tags, ch_c)
    nbins = _nbins(range_ps, bin_width_ps)
    counts = np.zeros((nbins, nbins), dtype=np.int64)
    for s in range(0, t0.size, chunk_anchors):
        counts += _backend.hist2d(t0[s : s + chunk_anchors], t1, t2, bin_width_ps, nbins)
    return Histogram2D(bin_width_ps, counts, _acquisition_s((t0, t1, t2)))


def histogram_to_csv(hist: Histogram1D, path) -> None:
    centers = hist.bin_centers()
    with open(path, "w") as f:
        f.write("delay_ps,counts\n")
        for c, n in zip(centers, hist.counts):
            f.write(f"{c},{n}\n")


def histogram2d_to_csv(hist: Histogram2D, path) -> None:
    centers = hist.bin_centers()
    with open(path, "w") as f:
        f.write("delay1_ps,delay2_ps,counts\n")
        for i, c1 in enumerate(centers):
            row = hist.counts[i]
            for j in np.flatnonzero(row):
                f.write(f"{c1},{centers[j]},{row[j]}\n")
