"""Closed-form and numeric reference curves used to cross-check the Monte
Carlo: the dispersed classical pulsed carrier, and the erf-form contrast
factors for heralded signal/idler tones.

The classical response is evaluated by an explicit Fourier round trip
(pulse -> spectrum -> quadratic-phase transfer -> intensity -> RF component)
rather than a hand-derived closed form. The fiber transfer convention is
exp(-i*[beta1*dw + beta2*dw^2]) with *no* 1/2 on the quadratic term, so a
detuned photon sees group delay 2*beta2*dw, consistent with the event-level
dispersion model and with gvd_to_beta2.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .errors import GridResolutionError, ParameterError


@dataclass(frozen=True)
class ClassicalCarrier:
    """Pulsed classical carrier through the modulated, dispersive link."""

    pulse_width_tau_p: float  # ps, envelope exp(-t^2/tau_p^2)
    rf_omega: float  # rad/ps
    beta1: float  # ps
    beta2: float  # ps^2
    grid: tuple[float, float, float]  # (t_min, t_max, dt) in ps


@dataclass
class ClassicalWaveform:
    time: np.ndarray  # ps
    intensity: np.ndarray  # normalized to unit peak of the reference
    rf_amplitude: float  # RF component magnitude relative to the beta2=0 case
    rf_phase: float  # rad, relative to the undispersed reference


def _rf_component(intensity: np.ndarray, t: np.ndarray, omega: float) -> complex:
    return complex(np.sum(intensity * np.exp(-1j * omega * t)))


def classical_pulsed_waveform(c: ClassicalCarrier) -> ClassicalWaveform:
    """Dispersed intensity profile and its RF tone, via FFT round trip.

    The output amplitude is normalized against an otherwise-identical run
    with beta1 = beta2 = 0, so an ideal channel returns rf_amplitude = 1.
    """
    if c.pulse_width_tau_p <= 0:
        raise ParameterError(f"tau_p must be > 0, got {c.pulse_width_tau_p}")
    if c.rf_omega <= 0:
        raise ParameterError(f"rf_omega must be > 0, got {c.rf_omega}")
    t_min, t_max, dt = c.grid
    if dt <= 0 or t_max <= t_min:
        raise ParameterError(f"invalid grid {c.grid}")

    tau_p = c.pulse_width_tau_p
    broadened = math.hypot(tau_p, 2.0 * abs(c.beta2) / tau_p)
    span = t_max - t_min
    if span < 6.0 * broadened:
        raise GridResolutionError(
            f"grid span {span:.1f} ps < 6 broadened widths ({6 * broadened:.1f} ps)"
        )
    period = 2.0 * math.pi / c.rf_omega
    if dt > period / 8.0 or dt > tau_p / 8.0:
        raise GridResolutionError(
            f"dt={dt} ps under-resolves the RF period ({period:.2f} ps) or "
            f"the pulse ({tau_p} ps); need >= 8 samples of each"
        )

    n = int(round(span / dt))
    t = t_min + np.arange(n) * dt
    envelope = np.exp(-(t**2) / tau_p**2) * (1.0 + np.cos(c.rf_omega * t))

    omega = 2.0 * math.pi * np.fft.fftfreq(n, d=dt)
    transfer = np.exp(-1j * (c.beta1 * omega + c.beta2 * omega**2))
    field = np.fft.ifft(np.fft.fft(envelope) * transfer)
    intensity = np.abs(field) ** 2

    ref_intensity = envelope**2
    comp = _rf_component(intensity, t, c.rf_omega)
    comp_ref = _rf_component(ref_intensity, t, c.rf_omega)
    scale = float(ref_intensity.max())
    return ClassicalWaveform(
        time=t,
        intensity=intensity / scale,
        rf_amplitude=float(abs(comp) / abs(comp_ref)),
        rf_phase=float(np.angle(comp * np.conj(comp_ref))),
    )


@dataclass(frozen=True)
class HeraldFactors:
    """Inputs to the heralded-tone contrast factors.

    window_tau    ps, full heralding window width
    corr_width_w  ps, 1/e full width of the (dispersed) arrival-difference
                  distribution: 2*sqrt(2)*sqrt((tau_c/2)^2 + (2*beta2*sigma_w)^2)
    walkoff_delta ps, modulation-sideband walk-off 4*beta2*w_rf
    phase         rad, dispersion phase -beta2*w_rf^2
    """

    window_tau: float
    corr_width_w: float
    walkoff_delta: float
    phase: float

    def __post_init__(self) -> None:
        if self.window_tau <= 0:
            raise ParameterError(f"window_tau must be > 0, got {self.window_tau}")
        if self.corr_width_w <= 0:
            raise ParameterError(f"corr_width_w must be > 0, got {self.corr_width_w}")

    @classmethod
    def from_link(
        cls,
        window_tau: float,
        tau_c: float,
        beta2: float,
        sigma_omega: float,
        rf_omega: float,
    ) -> "HeraldFactors":
        sigma_disp = math.hypot(tau_c / 2.0, 2.0 * beta2 * sigma_omega)
        return cls(
            window_tau=window_tau,
            corr_width_w=2.0 * math.sqrt(2.0) * sigma_disp,
            walkoff_delta=4.0 * beta2 * rf_omega,
            phase=-beta2 * rf_omega**2,
        )

    def with_window(self, window_tau: float) -> "HeraldFactors":
        return HeraldFactors(window_tau, self.corr_width_w, self.walkoff_delta, self.phase)


def c1_factor(h: HeraldFactors) -> float:
    """Signal-arm contrast: (erf((tau+d)/2w) + erf((tau-d)/2w)) / 2.

    The imaginary corrections to the erf arguments are dropped; they are
    negligible in the regime tau >> walkoff, which is checked softly here.
    """
    if h.window_tau < 2.0 * abs(h.walkoff_delta):
        warnings.warn(
            f"window {h.window_tau:.3g} ps is not >> walk-off "
            f"{h.walkoff_delta:.3g} ps; the dropped imaginary corrections may matter",
            stacklevel=2,
        )
    tau, d, w = h.window_tau, h.walkoff_delta, h.corr_width_w
    return float(0.5 * (erf((tau + d) / (2.0 * w)) + erf((tau - d) / (2.0 * w))))


def c2_factor(h: HeraldFactors) -> float:
    """Idler-arm contrast: (erf((tau+d)/2w) - erf((tau-d)/2w)) / 2, in [0, 1)."""
    tau, d, w = h.window_tau, abs(h.walkoff_delta), h.corr_width_w
    val = 0.5 * (erf((tau + d) / (2.0 * w)) - erf((tau - d) / (2.0 * w)))
    return float(min(max(val, 0.0), 1.0))


@dataclass
class FomCurve:
    taus: np.ndarray  # ps
    fom: np.ndarray
    argmax_tau: float  # ps, first tau achieving the maximum


def herald_figure_of_merit(
    arm: str,
    h: HeraldFactors,
    coincidence_profile_sigma: float,
    taus: np.ndarray | None = None,
) -> FomCurve:
    """Contrast-times-sqrt(counts) merit curve over window width.

    fom(tau) = C(tau) * sqrt(P(tau)) with C the arm's contrast factor and
    P(tau) = erf(tau / (2*sqrt(2)*sigma)) the captured fraction of the
    coincidence peak.
    """
    if arm not in ("signal", "idler"):
        raise ParameterError(f"arm must be 'signal' or 'idler', got {arm!r}")
    sigma = coincidence_profile_sigma
    if sigma <= 0:
        raise ParameterError(f"coincidence_profile_sigma must be > 0, got {sigma}")
    if taus is None:
        scale = max(h.corr_width_w, 2.0 * math.sqrt(2.0) * sigma)
        taus = np.geomspace(scale / 100.0, 20.0 * scale, 500)
    taus = np.asarray(taus, dtype=np.float64)

    factor = c1_factor if arm == "signal" else c2_factor
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # regime warnings across a whole curve
        contrast = np.array([factor(h.with_window(t)) for t in taus])
    captured = erf(taus / (2.0 * math.sqrt(2.0) * sigma))
    fom = contrast * np.sqrt(captured)
    return FomCurve(taus=taus, fom=fom, argmax_tau=float(taus[int(np.argmax(fom))]))


def predicted_heralded_tone(
    arm: str,
    h: HeraldFactors,
    beta1: float = 0.0,
    rf_omega: float = 0.0,
) -> tuple[float, float]:
    """(amplitude, phase) of the RF tone on the heralded arm.

    Amplitude is the arm's contrast factor; the phase is the dispersion
    phase, plus the bulk-delay offset rf_omega*beta1 on the idler arm.
    """
    if arm == "signal":
        return c1_factor(h), h.phase
    if arm == "idler":
        return c2_factor(h), h.phase + rf_omega * beta1
    raise ParameterError(f"arm must be 'signal' or 'idler', got {arm!r}")
