# cython: boundscheck=False, wraparound=False, cdivision=True
"""Two-pointer sweep kernels over sorted event-time arrays.

These are the hot inner loops of the correlator: histogramming all pairwise
lags within a window, and flagging events that have a partner inside a
window. Both run in O(n + m + matches) by advancing monotone pointers.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def count_lags(
    double[::1] a,
    double[::1] b,
    double lag_min,
    double bin_width,
    Py_ssize_t n_bins,
):
    """Histogram of (b[j] - a[i]) over bins [lag_min + k*w, lag_min + (k+1)*w)."""
    cdef Py_ssize_t na = a.shape[0]
    cdef Py_ssize_t nb = b.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] counts = np.zeros(n_bins, dtype=np.int64)
    cdef cnp.int64_t[::1] cview = counts
    cdef Py_ssize_t i, j, lo = 0, hi = 0, k
    cdef double lag_max = lag_min + bin_width * n_bins
    cdef double t_lo, t_hi

    for i in range(na):
        t_lo = a[i] + lag_min
        t_hi = a[i] + lag_max
        while lo < nb and b[lo] < t_lo:
            lo += 1
        if hi < lo:
            hi = lo
        while hi < nb and b[hi] < t_hi:
            hi += 1
        for j in range(lo, hi):
            k = <Py_ssize_t>((b[j] - t_lo) / bin_width)
            if k >= n_bins:  # float round-off at the upper edge
                k = n_bins - 1
            cview[k] += 1
    return counts


def match_mask(
    double[::1] a,
    double[::1] b,
    double lo_off,
    double hi_off,
):
    """Boolean mask over a: True where some b lies in [a[i]+lo_off, a[i]+hi_off]."""
    cdef Py_ssize_t na = a.shape[0]
    cdef Py_ssize_t nb = b.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] mask = np.zeros(na, dtype=np.uint8)
    cdef cnp.uint8_t[::1] mview = mask
    cdef Py_ssize_t i, lo = 0

    for i in range(na):
        while lo < nb and b[lo] < a[i] + lo_off:
            lo += 1
        if lo < nb and b[lo] <= a[i] + hi_off:
            mview[i] = 1
    return mask.view(np.bool_)
