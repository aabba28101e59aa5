"""Idler-arm link transforms: modulation, dispersion, detection, TCSPC.

The modulator sits before the dispersive fiber (the config flag
``disperse_before_modulate`` swaps them). Modulation is probabilistic
thinning of whole pairs against the MZM intensity transfer evaluated at the
idler arrival time; the surviving records keep both photons, while the
detector stage for the signal arm is normally fed the *unthinned* signal
times, since signal photons never pass the modulator.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, ParameterError, RecordError
from .params import PS_PER_S, DetectorParams, LinkParams, TcspcParams, fwhm_to_sigma
from .rng import keyed_uniform
from .source import PairStream

# RF drive phase at t = 0; the generator is phase-locked to the sync clock.
RF_SYNC_PHASE = 0.0


@dataclass
class TimeTagStream:
    """One detector channel: absolute event times in ps, sorted."""

    channel_id: int
    times: np.ndarray
    is_dark: np.ndarray
    duration: float  # s, measurement span

    def __post_init__(self) -> None:
        if len(self.times) != len(self.is_dark):
            raise ContractError("times and is_dark must have equal lengths")
        if len(self.times) > 1 and np.any(np.diff(self.times) < 0):
            raise ContractError("timetag stream must be sorted")

    def __len__(self) -> int:
        return len(self.times)

    def take(self, mask_or_index: np.ndarray) -> "TimeTagStream":
        return TimeTagStream(
            channel_id=self.channel_id,
            times=self.times[mask_or_index],
            is_dark=self.is_dark[mask_or_index],
            duration=self.duration,
        )


@dataclass
class T3Stream:
    """Quantized TCSPC records: sync index and bin-within-period."""

    nsync: np.ndarray
    dtime_bin: np.ndarray
    tcspc: TcspcParams

    def __len__(self) -> int:
        return len(self.nsync)


def mzm_retention(t_ps: np.ndarray, link: LinkParams) -> np.ndarray:
    """MZM power-transfer probability at each time.

    p(t) = 0.5 * (1 - cos(phi_b + beta * cos(w_rf * t + phi_rf))); by
    construction p is in [0, 1] for any bias and drive.
    """
    drive = link.rf_mod_index * np.cos(link.rf_omega * t_ps + RF_SYNC_PHASE)
    return 0.5 * (1.0 - np.cos(link.mzm_bias_phase + drive))


def modulate(pairs: PairStream, link: LinkParams, seed: int) -> PairStream:
    """Thin pairs against the modulator transfer at the idler time.

    Retention draws are keyed by pair identity, not stream position, so the
    surviving set is independent of event ordering.
    """
    if link.rf_mod_index < 0:
        raise ParameterError(f"rf_mod_index must be >= 0, got {link.rf_mod_index}")
    if link.rf_mod_index > np.pi:
        warnings.warn(
            f"modulator overdrive: rf_mod_index={link.rf_mod_index:.3f} > pi",
            stacklevel=2,
        )
    p = mzm_retention(pairs.t_idler, link)
    keep = keyed_uniform(seed, pairs.pair_id) < p
    return pairs.take(keep)


def disperse(pairs: PairStream, beta1: float, beta2: float) -> PairStream:
    """Apply group delay beta1 and detuning-dependent delay 2*beta2*detuning
    to the idler times; signal times are untouched."""
    shifted = pairs.t_idler + beta1 + 2.0 * beta2 * pairs.detuning
    out = PairStream(
        t_signal=pairs.t_signal,
        t_idler=shifted,
        detuning=pairs.detuning,
        pair_id=pairs.pair_id,
        duration=pairs.duration,
        source=pairs.source,
    )
    # Streams are keyed on t_signal, which dispersion never touches; the
    # constructor asserts sortedness either way.
    return out


def detect(
    times: np.ndarray,
    det: DetectorParams,
    duration: float,
    seed: int,
    channel_id: int = 0,
) -> TimeTagStream:
    """Detector model: efficiency thinning, Gaussian jitter, Poisson darks.

    Jittered events that land outside [0, duration] are dropped (the
    recorder is not armed there). Output is time-sorted with per-event
    photon/dark origin flags kept for diagnostics.
    """
    if not 0.0 <= det.efficiency <= 1.0:
        raise ParameterError(f"efficiency must be in [0, 1], got {det.efficiency}")
    if det.jitter_fwhm < 0:
        raise ParameterError(f"jitter_fwhm must be >= 0, got {det.jitter_fwhm}")
    if det.dark_rate < 0:
        raise ParameterError(f"dark_rate must be >= 0, got {det.dark_rate}")
    if duration < 0:
        raise ParameterError(f"duration must be >= 0, got {duration}")

    rng = np.random.default_rng(seed)
    duration_ps = duration * PS_PER_S

    kept = np.asarray(times, dtype=np.float64)
    if det.efficiency < 1.0:
        kept = kept[rng.random(len(kept)) < det.efficiency]
    sigma = fwhm_to_sigma(det.jitter_fwhm)
    if sigma > 0 and len(kept):
        kept = kept + rng.normal(0.0, sigma, len(kept))

    n_dark = rng.poisson(det.dark_rate * duration) if det.dark_rate > 0 else 0
    darks = rng.random(n_dark) * duration_ps

    all_times = np.concatenate([kept, darks])
    flags = np.concatenate(
        [np.zeros(len(kept), dtype=bool), np.ones(n_dark, dtype=bool)]
    )
    inside = (all_times >= 0.0) & (all_times <= duration_ps)
    all_times = all_times[inside]
    flags = flags[inside]

    order = np.argsort(all_times, kind="stable")
    return TimeTagStream(
        channel_id=channel_id,
        times=all_times[order],
        is_dark=flags[order],
        duration=duration,
    )


def record_t3(stream: TimeTagStream, tc: TcspcParams) -> T3Stream:
    """Quantize a timetag stream into (sync index, dtime bin) T3 records.

    Events at or beyond the measurement time are outside the recording span
    and are dropped; negative times are a caller error.
    """
    t = stream.times
    if len(t) and t[0] < 0:
        raise RecordError(f"negative event time: {t[0]} ps")
    span_ps = tc.measurement_time * PS_PER_S
    t = t[t < span_ps]

    sync_ps = tc.sync_period_ps
    nsync = np.floor_divide(t, sync_ps).astype(np.int64)
    remainder = t - nsync * sync_ps
    dtime = np.floor_divide(remainder, tc.bin_resolution).astype(np.int64)
    np.clip(dtime, 0, tc.n_bins_per_sync - 1, out=dtime)
    return T3Stream(nsync=nsync, dtime_bin=dtime, tcspc=tc)
