"""Pure numpy coincidence kernels (fallback when the Cython build is absent).

Binning convention shared bit-for-bit with the compiled kernels: nbins is odd,
bins are centered on integer multiples of bin_ps, the window lower edge is
lo_edge = -(nbins//2 * bin_ps + bin_ps//2), and a delay d maps to bin
(d - lo_edge) // bin_ps for d in [lo_edge, lo_edge + nbins*bin_ps).
"""
from __future__ import annotations

import numpy as np


def window_lo_edge(bin_ps: int, nbins: int) -> int:
    return -((nbins // 2) * bin_ps + bin_ps // 2)


def hist1d(ta: np.ndarray, tb: np.ndarray, bin_ps: int, nbins: int) -> np.ndarray:
    """Histogram of delays tb - ta falling inside the window; O(n + pairs)."""
    lo_edge = window_lo_edge(bin_ps, nbins)
    hi_excl = lo_edge + nbins * bin_ps
    counts = np.zeros(nbins, dtype=np.int64)
    lo = np.searchsorted(tb, ta + lo_edge, side="left")
    hi = np.searchsorted(tb, ta + hi_excl, side="left")
    m = hi - lo
    tot = int(m.sum())
    if tot == 0:
        return counts
    rep = np.repeat(np.arange(ta.size), m)
    starts = np.cumsum(m) - m
    flat = np.arange(tot, dtype=np.int64) - np.repeat(starts, m) + np.repeat(lo, m)
    delta = tb[flat] - ta[rep]
    k = (delta - lo_edge) // bin_ps
    counts += np.bincount(k, minlength=nbins).astype(np.int64)
    return counts


def hist2d(
    t0: np.ndarray, t1: np.ndarray, t2: np.ndarray, bin_ps: int, nbins: int
) -> np.ndarray:
    """2D histogram of (t1 - t0, t2 - t0); anchors with an empty window skip fast."""
    lo_edge = window_lo_edge(bin_ps, nbins)
    hi_excl = lo_edge + nbins * bin_ps
    counts = np.zeros((nbins, nbins), dtype=np.int64)
    lo1 = np.searchsorted(t1, t0 + lo_edge, side="left")
    hi1 = np.searchsorted(t1, t0 + hi_excl, side="left")
    lo2 = np.searchsorted(t2, t0 + lo_edge, side="left")
    hi2 = np.searchsorted(t2, t0 + hi_excl, side="left")
    live = np.flatnonzero((hi1 > lo1) & (hi2 > lo2))
    for i in live:
        k1 = (t1[lo1[i] : hi1[i]] - t0[i] - lo_edge) // bin_ps
        k2 = (t2[lo2[i] : hi2[i]] - t0[i] - lo_edge) // bin_ps
        np.add.at(counts, (k1[:, None], k2[None, :]), 1)
    return counts
