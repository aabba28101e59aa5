"""Parameter types, unit conversions, and config validation.

Internal unit conventions, used everywhere downstream:

* time            picoseconds (ps)
* rates/durations counts per second / seconds (converted at the boundary)
* dispersion      ps/nm at the config surface, quadratic-phase beta2 in ps**2
                  internally, with the convention that a photon detuned by
                  d_omega (rad/ps) picks up an extra group delay of
                  2 * beta2 * d_omega
* angular freq    rad/ps

The biphoton correlation width tau_c follows the |psi|^2 ~ exp(-2*dt^2/tau_c^2)
convention, so the arrival-difference standard deviation is tau_c / 2.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, ParameterError

# Speed of light in nm/ps (= 299792.458); exact by SI definition.
C_NM_PER_PS = 299792.458

_FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))  # 2.3548...

PS_PER_S = 1e12
PS_PER_NS = 1e3


@dataclass(frozen=True)
class SourceParams:
    """Photon-pair source settings.

    pair_rate            pairs per second (Poisson emission)
    duration             seconds of emission
    corr_width_tau_c     ps; |psi|^2 ~ exp(-2*dt^2/tau_c^2)
    spectral_fwhm_lambda nm; FWHM of the idler marginal spectrum
    center_wavelength    nm
    seed                 64-bit RNG seed
    """

    pair_rate: float = 1e6
    duration: float = 0.1
    corr_width_tau_c: float = 1.0
    spectral_fwhm_lambda: float = 2.4
    center_wavelength: float = 1560.0
    seed: int = 12345


@dataclass(frozen=True)
class LinkParams:
    """Modulator + fiber settings for the idler arm.

    rf_freq        Hz
    rf_mod_index   dimensionless beta = pi * V / V_pi
    mzm_bias_phase rad (pi/2 = quadrature)
    gvd            ps/nm
    beta1          ps (bulk group delay)
    beta2          ps^2; derived from gvd when None, see gvd_to_beta2
    """

    rf_freq: float = 2e9
    rf_mod_index: float = 0.6
    mzm_bias_phase: float = math.pi / 2.0
    gvd: float = 0.0
    beta1: float = 0.0
    beta2: float | None = None

    @property
    def rf_omega(self) -> float:
        """Angular RF frequency in rad/ps."""
        return 2.0 * math.pi * self.rf_freq * 1e-12


@dataclass(frozen=True)
class DetectorParams:
    efficiency: float = 0.8
    jitter_fwhm: float = 50.0  # ps
    dark_rate: float = 100.0  # counts/s


@dataclass(frozen=True)
class TcspcParams:
    sync_period: float = 100.0  # ns
    bin_resolution: float = 8.0  # ps
    measurement_time: float = 0.1  # s

    @property
    def sync_period_ps(self) -> float:
        return self.sync_period * PS_PER_NS

    @property
    def n_bins_per_sync(self) -> int:
        return int(round(self.sync_period_ps / self.bin_resolution))

    @property
    def sampling_freq(self) -> float:
        """Hz; inverse of the bin resolution."""
        return 1e12 / self.bin_resolution


def gvd_to_beta2(gvd: float, wavelength: float) -> float:
    """Convert fiber dispersion in ps/nm to the quadratic-phase beta2 in ps^2.

    The transfer function exp(-i*[beta1*dw + beta2*dw^2]) gives a group delay
    slope of 2*beta2 per unit detuning, so matching the ps/nm figure requires
    2*beta2 = gvd * lambda^2 / (2*pi*c).
    """
    if wavelength <= 0:
        raise ParameterError(f"wavelength must be positive, got {wavelength}")
    if gvd < 0:
        raise ParameterError(f"gvd must be >= 0, got {gvd}")
    return gvd * wavelength**2 / (4.0 * math.pi * C_NM_PER_PS)


def fwhm_to_sigma(fwhm: float) -> float:
    """Gaussian FWHM -> standard deviation."""
    if fwhm < 0:
        raise ParameterError(f"fwhm must be >= 0, got {fwhm}")
    return fwhm / _FWHM_PER_SIGMA


def sigma_to_fwhm(sigma: float) -> float:
    if sigma < 0:
        raise ParameterError(f"sigma must be >= 0, got {sigma}")
    return sigma * _FWHM_PER_SIGMA


def spectral_sigma_omega(spectral_fwhm_lambda: float, wavelength: float) -> float:
    """Marginal spectral width as an angular-frequency std in rad/ps."""
    if spectral_fwhm_lambda <= 0:
        raise ParameterError(
            f"spectral_fwhm_lambda must be positive, got {spectral_fwhm_lambda}"
        )
    if wavelength <= 0:
        raise ParameterError(f"wavelength must be positive, got {wavelength}")
    sigma_lambda = spectral_fwhm_lambda / _FWHM_PER_SIGMA
    return 2.0 * math.pi * C_NM_PER_PS / wavelength**2 * sigma_lambda


def tau_c_to_sigma_delta(tau_c: float) -> float:
    """Arrival-difference std for the exp(-2*dt^2/tau_c^2) convention."""
    if tau_c <= 0:
        raise ParameterError(f"corr_width_tau_c must be positive, got {tau_c}")
    return tau_c / 2.0


def predicted_coincidence_fwhm(
    jitter1_fwhm: float, jitter2_fwhm: float, tau_c: float
) -> float:
    """Quadrature-sum FWHM of the two-detector coincidence peak, in ps.

    The source contributes the FWHM of exp(-2*dt^2/tau_c^2), which is
    tau_c * sqrt(2*ln 2); detector jitters add in quadrature.
    """
    for name, v in (
        ("jitter1_fwhm", jitter1_fwhm),
        ("jitter2_fwhm", jitter2_fwhm),
        ("tau_c", tau_c),
    ):
        if v < 0:
            raise ParameterError(f"{name} must be >= 0, got {v}")
    w_c = tau_c * math.sqrt(2.0 * math.log(2.0))
    return math.sqrt(jitter1_fwhm**2 + jitter2_fwhm**2 + w_c**2)


def predicted_dispersed_fwhm(
    jitter1_fwhm: float,
    jitter2_fwhm: float,
    tau_c: float,
    beta2: float,
    sigma_omega: float,
) -> float:
    """Coincidence FWHM including the GVD-induced 2*beta2*d_omega spread."""
    base = predicted_coincidence_fwhm(jitter1_fwhm, jitter2_fwhm, tau_c)
    disp = sigma_to_fwhm(2.0 * abs(beta2) * sigma_omega)
    return math.sqrt(base**2 + disp**2)


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment configuration with derived fields filled in."""

    source: SourceParams
    link: LinkParams
    detector_signal: DetectorParams
    detector_idler: DetectorParams
    tcspc: TcspcParams
    disperse_before_modulate: bool = False

    # Derived (populated by validate_config)
    beta2: float = 0.0
    sigma_omega: float = 0.0
    sigma_delta: float = 0.0
    n_bins_per_sync: int = 0
    jitter_sigma_signal: float = 0.0
    jitter_sigma_idler: float = 0.0

    @property
    def coincidence_fwhm(self) -> float:
        """Predicted coincidence FWHM (ps) including dispersion."""
        return predicted_dispersed_fwhm(
            self.detector_signal.jitter_fwhm,
            self.detector_idler.jitter_fwhm,
            self.source.corr_width_tau_c,
            self.beta2,
            self.sigma_omega,
        )


def validate_config(
    source: SourceParams,
    link: LinkParams,
    detector_signal: DetectorParams,
    detector_idler: DetectorParams,
    tcspc: TcspcParams,
    disperse_before_modulate: bool = False,
) -> ExperimentConfig:
    """Check every invariant and fill in derived quantities.

    All violations are collected and reported together, each with the
    offending field name.
    """
    problems: list[str] = []

    if source.pair_rate < 0:
        problems.append(f"source.pair_rate must be >= 0, got {source.pair_rate}")
    if source.duration < 0:
        problems.append(f"source.duration must be >= 0, got {source.duration}")
    if source.corr_width_tau_c <= 0:
        problems.append(
            f"source.corr_width_tau_c must be > 0, got {source.corr_width_tau_c}"
        )
    if source.spectral_fwhm_lambda <= 0:
        problems.append(
            f"source.spectral_fwhm_lambda must be > 0, got {source.spectral_fwhm_lambda}"
        )
    if source.center_wavelength <= 0:
        problems.append(
            f"source.center_wavelength must be > 0, got {source.center_wavelength}"
        )

    if link.rf_freq <= 0:
        problems.append(f"link.rf_freq must be > 0, got {link.rf_freq}")
    if link.rf_mod_index < 0:
        problems.append(f"link.rf_mod_index must be >= 0, got {link.rf_mod_index}")
    if link.gvd < 0:
        problems.append(f"link.gvd must be >= 0, got {link.gvd}")

    for tag, det in (("detector_signal", detector_signal), ("detector_idler", detector_idler)):
        if not 0.0 <= det.efficiency <= 1.0:
            problems.append(f"{tag}.efficiency must be in [0, 1], got {det.efficiency}")
        if det.jitter_fwhm < 0:
            problems.append(f"{tag}.jitter_fwhm must be >= 0, got {det.jitter_fwhm}")
        if det.dark_rate < 0:
            problems.append(f"{tag}.dark_rate must be >= 0, got {det.dark_rate}")

    if tcspc.sync_period <= 0:
        problems.append(f"tcspc.sync_period must be > 0, got {tcspc.sync_period}")
    if tcspc.bin_resolution <= 0:
        problems.append(f"tcspc.bin_resolution must be > 0, got {tcspc.bin_resolution}")
    if tcspc.measurement_time < 0:
        problems.append(
            f"tcspc.measurement_time must be >= 0, got {tcspc.measurement_time}"
        )
    n_bins = 0
    if tcspc.sync_period > 0 and tcspc.bin_resolution > 0:
        ratio = tcspc.sync_period_ps / tcspc.bin_resolution
        n_bins = int(round(ratio))
        if n_bins < 1 or abs(ratio - n_bins) > 1e-9 * max(ratio, 1.0):
            problems.append(
                "tcspc.sync_period must be an integer multiple of "
                f"tcspc.bin_resolution, got {tcspc.sync_period} ns / "
                f"{tcspc.bin_resolution} ps"
            )
            n_bins = 0

    if problems:
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(problems))

    beta2 = link.beta2
    if beta2 is None:
        beta2 = gvd_to_beta2(link.gvd, source.center_wavelength)
    return ExperimentConfig(
        source=source,
        link=link,
        detector_signal=detector_signal,
        detector_idler=detector_idler,
        tcspc=tcspc,
        disperse_before_modulate=disperse_before_modulate,
        beta2=beta2,
        sigma_omega=spectral_sigma_omega(
            source.spectral_fwhm_lambda, source.center_wavelength
        ),
        sigma_delta=tau_c_to_sigma_delta(source.corr_width_tau_c),
        n_bins_per_sync=n_bins,
        jitter_sigma_signal=fwhm_to_sigma(detector_signal.jitter_fwhm),
        jitter_sigma_idler=fwhm_to_sigma(detector_idler.jitter_fwhm),
    )


_SECTION_TYPES = {
    "source": SourceParams,
    "link": LinkParams,
    "detector_signal": DetectorParams,
    "detector_idler": DetectorParams,
    "tcspc": TcspcParams,
}

_INT_FIELDS = {"seed"}
_BOOL_LINK_FLAGS = {"disperse_before_modulate"}


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse the INI-style config file and return a validated config.

    Sections are [source], [link], [detector_signal], [detector_idler] and
    [tcspc]; keys match the dataclass field names; values are plain numbers
    in the documented units (no unit suffixes).
    """
    path = Path(path)
    parser = configparser.ConfigParser()
    try:
        with path.open("r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError:
        raise
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config file {path}: {exc}") from exc

    unknown = set(parser.sections()) - set(_SECTION_TYPES)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    parsed: dict[str, object] = {}
    flags: dict[str, bool] = {}
    for section, cls in _SECTION_TYPES.items():
        kwargs = {}
        if parser.has_section(section):
            known = set(cls.__dataclass_fields__)
            for key, raw in parser.items(section):
                if section == "link" and key in _BOOL_LINK_FLAGS:
                    try:
                        flags[key] = parser.getboolean(section, key)
                    except ValueError as exc:
                        raise ConfigError(f"link.{key}: not a boolean: {raw!r}") from exc
                    continue
                if key not in known:
                    raise ConfigError(f"unknown key {key!r} in section [{section}]")
                try:
                    kwargs[key] = int(raw) if key in _INT_FIELDS else float(raw)
                except ValueError as exc:
                    raise ConfigError(f"{section}.{key}: not a number: {raw!r}") from exc
        parsed[section] = cls(**kwargs)

    return validate_config(
        parsed["source"],
        parsed["link"],
        parsed["detector_signal"],
        parsed["detector_idler"],
        parsed["tcspc"],
        disperse_before_modulate=flags.get("disperse_before_modulate", False),
    )
