"""Pure-numpy fallback for the sweep kernels.

Same contracts as the compiled versions in ``_sweepcore``: results are
bit-identical. Uses binary searches instead of explicit pointer loops;
memory for ``count_lags`` is O(matches), never O(n*m).
"""

from __future__ import annotations

import numpy as np


def count_lags(
    a: np.ndarray,
    b: np.ndarray,
    lag_min: float,
    bin_width: float,
    n_bins: int,
) -> np.ndarray:
    lag_max = lag_min + bin_width * n_bins
    lo = np.searchsorted(b, a + lag_min, side="left")
    hi = np.searchsorted(b, a + lag_max, side="left")
    per_a = hi - lo
    total = int(per_a.sum())
    if total == 0:
        return np.zeros(n_bins, dtype=np.int64)
    # Flat index construction: for each a[i], the run lo[i] .. hi[i]-1 of b.
    a_idx = np.repeat(np.arange(a.size), per_a)
    starts = np.cumsum(per_a) - per_a
    b_idx = np.arange(total) - np.repeat(starts, per_a) + np.repeat(lo, per_a)
    k = ((b[b_idx] - a[a_idx] - lag_min) / bin_width).astype(np.int64)
    np.clip(k, 0, n_bins - 1, out=k)
    return np.bincount(k, minlength=n_bins).astype(np.int64)


def match_mask(
    a: np.ndarray,
    b: np.ndarray,
    lo_off: float,
    hi_off: float,
) -> np.ndarray:
    left = np.searchsorted(b, a + lo_off, side="left")
    right = np.searchsorted(b, a + hi_off, side="right")
    return right > left
