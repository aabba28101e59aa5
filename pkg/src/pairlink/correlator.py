"""Coincidence histograms, peak location, and heralded post-selection.

All lag conventions are "b minus a": ``cross_correlate(a, b)`` histograms
t_b - t_a, and ``herald(a, b, w)`` keeps a-events that have at least one
b-partner with t_b - t_a inside the window. Selecting the other channel is
the same call with the arguments swapped and the window center mirrored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ContractError, NoPeakError, ParameterError
from .link import TimeTagStream


@dataclass
class CoincidenceHistogram:
    bin_width: float  # ps
    lag_min: float  # ps
    lag_max: float  # ps
    counts: np.ndarray  # int64
    total_pairs_scanned: int

    @property
    def lag_centers(self) -> np.ndarray:
        return self.lag_min + (np.arange(len(self.counts)) + 0.5) * self.bin_width


@dataclass(frozen=True)
class HeraldWindow:
    center: float  # ps, relative delay (absorbs any bulk group delay)
    width: float  # ps, full width

    def __post_init__(self) -> None:
        if self.width <= 0:
            raise ParameterError(f"window width must be > 0, got {self.width}")


@dataclass(frozen=True)
class PeakEstimate:
    center: float  # ps
    fwhm: float  # ps


def _times(stream) -> np.ndarray:
    return stream.times if isinstance(stream, TimeTagStream) else np.asarray(stream, float)


def _check_sorted(name: str, t: np.ndarray) -> None:
    if len(t) > 1 and np.any(np.diff(t) < 0):
        raise ContractError(f"{name} stream must be sorted")


def cross_correlate(
    a,
    b,
    lag_range: tuple[float, float] = (-5000.0, 5000.0),
    bin_width: float = 8.0,
) -> CoincidenceHistogram:
    """Histogram of all t_b - t_a differences inside lag_range.

    Runs as a sorted two-pointer sweep (O(n + m + matches)); the effective
    upper edge is rounded up to a whole number of bins.
    """
    ta, tb = _times(a), _times(b)
    _check_sorted("a", ta)
    _check_sorted("b", tb)
    lag_min, lag_max = float(lag_range[0]), float(lag_range[1])
    if not (math.isfinite(lag_min) and math.isfinite(lag_max)) or lag_max <= lag_min:
        raise ParameterError(f"invalid lag_range {lag_range}")
    if bin_width <= 0:
        raise ParameterError(f"bin_width must be > 0, got {bin_width}")

    n_bins = max(1, int(math.ceil((lag_max - lag_min) / bin_width - 1e-9)))
    counts = kernels.count_lags(ta, tb, lag_min, bin_width, n_bins)
    return CoincidenceHistogram(
        bin_width=bin_width,
        lag_min=lag_min,
        lag_max=lag_min + n_bins * bin_width,
        counts=counts,
        total_pairs_scanned=int(counts.sum()),
    )


def histogram_fwhm(h: CoincidenceHistogram) -> PeakEstimate:
    """Locate the dominant peak: background-subtracted centroid and FWHM.

    Background is the median bin count (robust while the peak occupies a
    minority of bins). The FWHM is interpolated linearly at half maximum
    above background. Raises NoPeakError when no bin exceeds twice the
    background.
    """
    counts = h.counts.astype(np.float64)
    if len(counts) == 0:
        raise NoPeakError("empty histogram")
    background = float(np.median(counts))
    peak_val = float(counts.max())
    if peak_val <= 2.0 * background or peak_val <= 0.0:
        raise NoPeakError(
            f"no coincidence peak: max={peak_val:.0f} vs background={background:.1f}"
        )
    half = background + 0.5 * (peak_val - background)
    k_peak = int(np.argmax(counts))

    lo = k_peak
    while lo > 0 and counts[lo - 1] >= half:
        lo -= 1
    hi = k_peak
    while hi < len(counts) - 1 and counts[hi + 1] >= half:
        hi += 1

    centers = h.lag_centers

    if lo > 0:
        frac = (half - counts[lo - 1]) / (counts[lo] - counts[lo - 1])
        left = centers[lo - 1] + frac * h.bin_width
    else:
        left = centers[0] - 0.5 * h.bin_width
    if hi < len(counts) - 1:
        frac = (counts[hi] - half) / (counts[hi] - counts[hi + 1])
        right = centers[hi] + frac * h.bin_width
    else:
        right = centers[-1] + 0.5 * h.bin_width

    weights = counts[lo : hi + 1] - background
    center = float(np.average(centers[lo : hi + 1], weights=weights))
    return PeakEstimate(center=center, fwhm=float(right - left))


def herald(a: TimeTagStream, b: TimeTagStream, w: HeraldWindow) -> TimeTagStream:
    """Keep every a-event with at least one b-partner inside the window.

    Multiple partners still select the event once; output is a sorted
    sub-sequence of a.
    """
    _check_sorted("a", a.times)
    _check_sorted("b", b.times)
    half = w.width / 2.0
    mask = kernels.match_mask(a.times, b.times, w.center - half, w.center + half)
    return a.take(mask)


def coincidence_peak(
    a,
    b,
    lag_half: float = 5000.0,
    bin_width: float = 8.0,
) -> tuple[CoincidenceHistogram, PeakEstimate]:
    """Convenience: symmetric-range cross correlation plus peak location."""
    hist = cross_correlate(a, b, (-lag_half, lag_half), bin_width)
    return hist, histogram_fwhm(hist)
