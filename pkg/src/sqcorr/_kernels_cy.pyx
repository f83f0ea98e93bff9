# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled coincidence kernels.

Same binning contract as _kernels_py: odd nbins, bins centered on multiples
of bin_ps, lower edge -(nbins//2*bin_ps + bin_ps//2), index (d - lo)//bin_ps.
All delays inside the window are non-negative relative to the lower edge, so
C integer division equals floor division here.
"""
import numpy as np

cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t i64


def window_lo_edge(long bin_ps, long nbins):
    return -((nbins // 2) * bin_ps + bin_ps // 2)


def hist1d(cnp.ndarray[i64, ndim=1] ta, cnp.ndarray[i64, ndim=1] tb,
           long bin_ps, long nbins):
    cdef i64 lo_edge = -((nbins // 2) * bin_ps + bin_ps // 2)
    cdef i64 hi_excl = lo_edge + nbins * bin_ps
    cdef cnp.ndarray[i64, ndim=1] counts = np.zeros(nbins, dtype=np.int64)
    cdef Py_ssize_t na = ta.shape[0], nb = tb.shape[0]
    cdef Py_ssize_t i, j, j0 = 0, j1 = 0
    cdef i64 lo_t, hi_t
    for i in range(na):
        lo_t = ta[i] + lo_edge
        hi_t = ta[i] + hi_excl
        while j0 < nb and tb[j0] < lo_t:
            j0 += 1
        if j1 < j0:
            j1 = j0
        while j1 < nb and tb[j1] < hi_t:
            j1 += 1
        for j in range(j0, j1):
            counts[(tb[j] - ta[i] - lo_edge) // bin_ps] += 1
    return counts


def hist2d(cnp.ndarray[i64, ndim=1] t0, cnp.ndarray[i64, ndim=1] t1,
           cnp.ndarray[i64, ndim=1] t2, long bin_ps, long nbins):
    cdef i64 lo_edge = -((nbins // 2) * bin_ps + bin_ps // 2)
    cdef i64 hi_excl = lo_edge + nbins * bin_ps
    cdef cnp.ndarray[i64, ndim=2] counts = np.zeros((nbins, nbins), dtype=np.int64)
    cdef Py_ssize_t n0 = t0.shape[0], n1 = t1.shape[0], n2 = t2.shape[0]
    cdef Py_ssize_t i, a, b, a0 = 0, a1 = 0, b0 = 0, b1 = 0
    cdef i64 lo_t, hi_t, k1
    for i in range(n0):
        lo_t = t0[i] + lo_edge
        hi_t = t0[i] + hi_excl
        while a0 < n1 and t1[a0] < lo_t:
            a0 += 1
        if a1 < a0:
            a1 = a0
        while a1 < n1 and t1[a1] < hi_t:
            a1 += 1
        while b0 < n2 and t2[b0] < lo_t:
            b0 += 1
        if b1 < b0:
            b1 = b0
        while b1 < n2 and t2[b1] < hi_t:
            b1 += 1
        if a1 == a0 or b1 == b0:
            continue
        for a in range(a0, a1):
            k1 = (t1[a] - t0[i] - lo_edge) // bin_ps
            for b in range(b0, b1):
                counts[k1, (t2[b] - t0[i] - lo_edge) // bin_ps] += 1
    return counts
