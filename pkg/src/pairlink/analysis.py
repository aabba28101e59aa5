"""Waveform folding, DFT spectra with noise-floor bookkeeping, SNR, SFDR,
and heralding-window sweeps.

Spectral conventions:

* the waveform is mean-removed, then zero-padded to the next power of two
  (so the pad level equals the mean and adds no rectangular step);
* power is 10*log10(|DFT|^2) referenced to the DC power of the *unremoved*
  waveform (i.e. dB relative to the total-count carrier);
* the plotted DFT noise floor sits 10*log10(N/2) dB below the actual noise
  level, which is what tone detectability is judged against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .correlator import HeraldWindow, coincidence_peak, herald
from .errors import DegenerateInputError, FitError, ParameterError
from .link import T3Stream, TimeTagStream, record_t3
from .params import TcspcParams

_DB_FLOOR = 1e-300  # linear floor before taking logs; keeps -inf out of dB arrays


@dataclass
class Waveform:
    bin_width: float  # ps
    counts: np.ndarray  # int64, length = sync_period / bin_width
    total_events: int


def fold_waveform(records: T3Stream, tc: TcspcParams) -> Waveform:
    """Accumulate dtime bins over all sync periods."""
    n_bins = tc.n_bins_per_sync
    counts = np.bincount(records.dtime_bin, minlength=n_bins).astype(np.int64)
    return Waveform(
        bin_width=tc.bin_resolution, counts=counts, total_events=int(counts.sum())
    )


@dataclass
class Spectrum:
    freqs: np.ndarray  # Hz, one-sided including Nyquist
    power_db: np.ndarray  # 10*log10(|X|^2), DC-referenced
    power_linear: np.ndarray  # |X|^2 of the mean-removed, padded waveform
    n_fft: int
    bin_bandwidth: float  # Hz
    dft_noise_floor_db: float
    actual_noise_floor_db: float
    reference_power: float  # (sum of counts)^2, the DC power used as 0 dB


def _next_pow2(n: int) -> int:
    return 1 << max(0, (n - 1).bit_length())


def _floor_exclusion(
    n_freqs: int, bin_bandwidth: float, declared_tone: float | None
) -> np.ndarray:
    """Boolean mask of bins excluded from the noise-floor estimate:
    DC +-2 bins, and +-2 bins around the first 4 harmonics of a declared tone."""
    excluded = np.zeros(n_freqs, dtype=bool)
    excluded[:3] = True
    if declared_tone is not None:
        for m in range(1, 5):
            k = int(round(m * declared_tone / bin_bandwidth))
            if 0 <= k < n_freqs:
                excluded[max(0, k - 2) : k + 3] = True
    return excluded


def spectrum(w: Waveform, fs: float, declared_tone: float | None = None) -> Spectrum:
    """Magnitude-squared DFT of the folded waveform with floor bookkeeping.

    declared_tone (Hz) marks a known modulation frequency whose first four
    harmonics are excluded from the noise-floor median.
    """
    counts = np.asarray(w.counts, dtype=np.float64)
    if len(counts) == 0 or not np.any(counts):
        raise DegenerateInputError("waveform is empty or all zero")
    if fs <= 0:
        raise ParameterError(f"sampling frequency must be > 0, got {fs}")

    n_fft = _next_pow2(len(counts))
    x = counts - counts.mean()
    spec = np.fft.rfft(x, n_fft)
    mag2 = np.abs(spec) ** 2
    reference = float(counts.sum()) ** 2

    power_db = 10.0 * np.log10(np.maximum(mag2, _DB_FLOOR) / reference)
    bin_bw = fs / n_fft
    freqs = np.fft.rfftfreq(n_fft, d=1.0 / fs)

    keep = ~_floor_exclusion(len(freqs), bin_bw, declared_tone)
    dft_floor = float(np.median(power_db[keep]))
    correction = 10.0 * math.log10(n_fft / 2.0)
    return Spectrum(
        freqs=freqs,
        power_db=power_db,
        power_linear=mag2,
        n_fft=n_fft,
        bin_bandwidth=bin_bw,
        dft_noise_floor_db=dft_floor,
        actual_noise_floor_db=dft_floor + correction,
        reference_power=reference,
    )


def spectral_power_sum(s: Spectrum) -> float:
    """Total linear power, folded back to a two-sided sum / n_fft.

    Equals the sum of squared (mean-removed) samples by Parseval's theorem.
    """
    mag2 = s.power_linear
    interior = mag2[1:-1].sum() if len(mag2) > 2 else 0.0
    total = mag2[0] + 2.0 * interior + (mag2[-1] if len(mag2) > 1 else 0.0)
    return float(total / s.n_fft)


@dataclass(frozen=True)
class ToneSnr:
    snr_db: float  # peak minus actual noise floor
    detected: bool  # peak above the actual noise floor
    peak_db: float
    peak_freq: float  # Hz


def tone_snr(s: Spectrum, f: float) -> ToneSnr:
    """Tone strength at f: max over the 3 nearest bins (tolerates leakage
    from zero-padding) minus the actual noise floor."""
    nyquist = s.freqs[-1]
    if not 0.0 <= f < nyquist:
        raise ParameterError(f"tone frequency {f} outside [0, {nyquist}) Hz")
    k = int(np.argmin(np.abs(s.freqs - f)))
    lo, hi = max(0, k - 1), min(len(s.freqs), k + 2)
    j = lo + int(np.argmax(s.power_db[lo:hi]))
    peak_db = float(s.power_db[j])
    return ToneSnr(
        snr_db=peak_db - s.actual_noise_floor_db,
        detected=peak_db > s.actual_noise_floor_db,
        peak_db=peak_db,
        peak_freq=float(s.freqs[j]),
    )


@dataclass(frozen=True)
class SfdrResult:
    fundamental_fit: tuple[float, float]  # (slope, intercept), dB out per dB in
    hd2_fit: tuple[float, float]
    noise_floor_1hz_db: float
    sfdr2_db_hz_half: float


def sfdr_fit(
    points: list[tuple[float, float, float]], noise_floor_1hz_db: float
) -> SfdrResult:
    """Fit fundamental and second-harmonic power laws and extrapolate SFDR2.

    points are (rf_power_in, fundamental_out, hd2_out) in dB; the noise floor
    must already be normalized to a 1 Hz bandwidth. SFDR2 is the fundamental
    output at the input power where the HD2 line crosses the floor, minus the
    floor.
    """
    if len(points) < 3:
        raise ParameterError(f"need >= 3 points, got {len(points)}")
    pts = np.asarray(points, dtype=np.float64)
    pin, fund, hd2 = pts[:, 0], pts[:, 1], pts[:, 2]
    if np.ptp(pin) == 0:
        raise FitError("degenerate regression: all input powers identical")

    s1, b1 = np.polyfit(pin, fund, 1)
    s2, b2 = np.polyfit(pin, hd2, 1)
    if s2 == 0:
        raise FitError("HD2 fit has zero slope; no floor crossing")
    pin_cross = (noise_floor_1hz_db - b2) / s2
    if abs(pin_cross) > 200.0:
        raise FitError(
            f"HD2 line crosses the floor at {pin_cross:.1f} dB input, outside +-200 dB"
        )
    sfdr2 = (s1 * pin_cross + b1) - noise_floor_1hz_db
    return SfdrResult(
        fundamental_fit=(float(s1), float(b1)),
        hd2_fit=(float(s2), float(b2)),
        noise_floor_1hz_db=noise_floor_1hz_db,
        sfdr2_db_hz_half=float(sfdr2),
    )


@dataclass
class SweepPoint:
    width: float  # ps
    selected_count: int
    snr_db: float


@dataclass
class SweepResult:
    points: list[SweepPoint]
    center: float  # ps, window center used for every width
    argmax_width: float  # ps, first width achieving the maximum SNR

    @property
    def widths(self) -> np.ndarray:
        return np.array([p.width for p in self.points])

    @property
    def snr_db(self) -> np.ndarray:
        return np.array([p.snr_db for p in self.points])

    @property
    def selected_counts(self) -> np.ndarray:
        return np.array([p.selected_count for p in self.points])


def window_sweep(
    signal: TimeTagStream,
    idler: TimeTagStream,
    widths,
    tc: TcspcParams,
    fs: float,
    f_rf: float,
    arm: str = "signal",
    center: float | None = None,
    lag_half: float = 5000.0,
    hist_bin: float = 8.0,
) -> SweepResult:
    """Herald -> fold -> spectrum -> tone SNR for each window width.

    arm selects which channel is post-selected ("signal" or "idler"); the
    window center defaults to the located coincidence-peak center.
    """
    widths = np.asarray(widths, dtype=np.float64)
    if widths.size == 0:
        raise ParameterError("widths list is empty")
    if np.any(widths <= 0):
        raise ParameterError("widths must be positive")
    if np.any(np.diff(widths) < 0):
        raise ParameterError("widths must be sorted ascending")
    if arm not in ("signal", "idler"):
        raise ParameterError(f"arm must be 'signal' or 'idler', got {arm!r}")

    a, b = (signal, idler) if arm == "signal" else (idler, signal)
    if center is None:
        _, peak = coincidence_peak(a, b, lag_half=lag_half, bin_width=hist_bin)
        center = peak.center

    points: list[SweepPoint] = []
    for width in widths:
        selected = herald(a, b, HeraldWindow(center=center, width=float(width)))
        wave = fold_waveform(record_t3(selected, tc), tc)
        if wave.total_events == 0:
            points.append(SweepPoint(float(width), 0, -math.inf))
            continue
        snr = tone_snr(spectrum(wave, fs, declared_tone=f_rf), f_rf)
        points.append(SweepPoint(float(width), wave.total_events, snr.snr_db))

    snrs = np.array([p.snr_db for p in points])
    best = int(np.argmax(snrs))
    return SweepResult(points=points, center=float(center), argmax_width=points[best].width)
