"""Backend selection for the sweep kernels.

The compiled extension is used when it imported cleanly; otherwise (or when
PAIRLINK_FORCE_NUMPY=1 is set) the numpy implementation takes over. Both
produce identical outputs; ``benchmarks/bench_kernels.py`` compares their
speed.
"""

from __future__ import annotations

import os

import numpy as np

from . import _sweep_numpy

BACKEND = "numpy"
_impl = _sweep_numpy

if not os.environ.get("PAIRLINK_FORCE_NUMPY"):
    try:
        from . import _sweepcore  # type: ignore[attr-defined]

        _impl = _sweepcore
        BACKEND = "cython"
    except ImportError:
        pass


def _as_f64(x: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=np.float64)


def count_lags(
    a: np.ndarray,
    b: np.ndarray,
    lag_min: float,
    bin_width: float,
    n_bins: int,
) -> np.ndarray:
    """Histogram counts of (b[j] - a[i]) lags; both inputs must be sorted."""
    return np.asarray(
        _impl.count_lags(_as_f64(a), _as_f64(b), float(lag_min), float(bin_width), int(n_bins))
    )


def match_mask(a: np.ndarray, b: np.ndarray, lo_off: float, hi_off: float) -> np.ndarray:
    """True per a-event when some b-event lies in [a + lo_off, a + hi_off]."""
    return np.asarray(_impl.match_mask(_as_f64(a), _as_f64(b), float(lo_off), float(hi_off)))
