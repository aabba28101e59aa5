"""Photon-pair event stream generation.

Pairs are emitted as a homogeneous Poisson process. Each pair carries an
arrival-time difference (idler minus signal) drawn from the biphoton
correlation profile, and a spectral detuning of the idler; the signal is
detuned by the opposite amount (perfect anticorrelation for a narrow CW
pump), so only the idler detuning is stored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, ParameterError
from .params import PS_PER_S, SourceParams, spectral_sigma_omega, tau_c_to_sigma_delta


@dataclass(frozen=True)
class PairEvent:
    t_signal: float  # ps
    t_idler: float  # ps
    detuning: float  # rad/ps, idler frequency offset


@dataclass
class PairStream:
    """Struct-of-arrays pair record, sorted by signal time.

    pair_id is a stable per-pair identity (emission order), used to key
    retention draws so that thinning commutes with re-ordering transforms.
    """

    t_signal: np.ndarray
    t_idler: np.ndarray
    detuning: np.ndarray
    pair_id: np.ndarray
    duration: float  # s
    source: SourceParams = field(default_factory=SourceParams)

    def __post_init__(self) -> None:
        n = len(self.t_signal)
        if not (len(self.t_idler) == len(self.detuning) == len(self.pair_id) == n):
            raise ContractError("pair-stream arrays must have equal lengths")
        if n > 1 and np.any(np.diff(self.t_signal) < 0):
            raise ContractError("pair stream must be sorted by t_signal")

    def __len__(self) -> int:
        return len(self.t_signal)

    def __getitem__(self, i: int) -> PairEvent:
        return PairEvent(
            float(self.t_signal[i]), float(self.t_idler[i]), float(self.detuning[i])
        )

    def take(self, mask_or_index: np.ndarray) -> "PairStream":
        return PairStream(
            t_signal=self.t_signal[mask_or_index],
            t_idler=self.t_idler[mask_or_index],
            detuning=self.detuning[mask_or_index],
            pair_id=self.pair_id[mask_or_index],
            duration=self.duration,
            source=self.source,
        )


def generate_pairs(src: SourceParams) -> PairStream:
    """Sample a pair stream; bit-identical for identical SourceParams."""
    if src.pair_rate < 0:
        raise ParameterError(f"pair_rate must be >= 0, got {src.pair_rate}")
    if src.duration < 0:
        raise ParameterError(f"duration must be >= 0, got {src.duration}")
    sigma_delta = tau_c_to_sigma_delta(src.corr_width_tau_c)
    sigma_omega = spectral_sigma_omega(src.spectral_fwhm_lambda, src.center_wavelength)

    rng = np.random.default_rng(src.seed)
    n = int(rng.poisson(src.pair_rate * src.duration)) if src.duration > 0 else 0
    duration_ps = src.duration * PS_PER_S

    t_signal = np.sort(rng.random(n) * duration_ps)
    delta = rng.normal(0.0, sigma_delta, n)
    detuning = rng.normal(0.0, sigma_omega, n)
    return PairStream(
        t_signal=t_signal,
        t_idler=t_signal + delta,
        detuning=detuning,
        pair_id=np.arange(n, dtype=np.uint64),
        duration=src.duration,
        source=src,
    )


@dataclass(frozen=True)
class PairSummary:
    count: int
    empirical_rate: float  # pairs/s
    mean_delta: float  # ps
    std_delta: float  # ps
    std_detuning: float  # rad/ps
    t_min: float  # ps
    t_max: float  # ps


def pair_statistics(stream: PairStream) -> PairSummary:
    """Moments of a pair stream; an empty stream yields NaN moments."""
    n = len(stream)
    if n == 0:
        nan = math.nan
        return PairSummary(0, 0.0, nan, nan, nan, nan, nan)
    delta = stream.t_idler - stream.t_signal
    rate = n / stream.duration if stream.duration > 0 else math.nan
    return PairSummary(
        count=n,
        empirical_rate=rate,
        mean_delta=float(delta.mean()),
        std_delta=float(delta.std()),
        std_detuning=float(stream.detuning.std()),
        t_min=float(stream.t_signal.min()),
        t_max=float(stream.t_signal.max()),
    )
