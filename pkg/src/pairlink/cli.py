"""Command-line pipeline: simulate, analyze, sweep, theory.

Exit codes: 0 success, 2 config/parameter error, 3 I/O error, 4 analysis
error (no locatable peak, degenerate input, failed fit, bad grid).

Every run is deterministic for a given config + seed: stage seeds are
derived from the one master seed, and all CSV output uses fixed formatting,
so byte-identical reruns are guaranteed.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import analysis, correlator, io, link, source, theory
from .errors import (
    AnalysisError,
    ConfigError,
    ContractError,
    PairlinkError,
    ParameterError,
    RecordError,
)
from .params import (
    ExperimentConfig,
    DetectorParams,
    LinkParams,
    SourceParams,
    TcspcParams,
    load_config,
    predicted_dispersed_fwhm,
    validate_config,
)
from .rng import stage_seeds

MANIFEST_FORMAT = "pairlink-run-v1"

ANALYZE_ARMS = ("direct-signal", "direct-idler", "herald-signal", "herald-idler")


def simulate_streams(
    cfg: ExperimentConfig, master_seed: int | None = None
) -> tuple[link.TimeTagStream, link.TimeTagStream, source.PairStream]:
    """Run source -> modulator -> fiber -> detectors for both arms.

    The signal detector sees *every* generated signal photon (that arm never
    passes the modulator); the idler detector sees only pairs surviving the
    modulator, after dispersion. Returns (signal_tags, idler_tags, pairs).
    """
    seed = cfg.source.seed if master_seed is None else master_seed
    s_src, s_mod, s_det_sig, s_det_idl = stage_seeds(seed, 4)

    src = dataclasses.replace(cfg.source, seed=s_src)
    pairs = source.generate_pairs(src)

    if cfg.disperse_before_modulate:
        idler_side = link.disperse(pairs, cfg.link.beta1, cfg.beta2)
        idler_side = link.modulate(idler_side, cfg.link, s_mod)
    else:
        idler_side = link.modulate(pairs, cfg.link, s_mod)
        idler_side = link.disperse(idler_side, cfg.link.beta1, cfg.beta2)

    duration = cfg.source.duration
    signal_tags = link.detect(
        pairs.t_signal, cfg.detector_signal, duration, s_det_sig, io.SIGNAL_CHANNEL
    )
    idler_times = np.sort(idler_side.t_idler)
    idler_tags = link.detect(
        idler_times, cfg.detector_idler, duration, s_det_idl, io.IDLER_CHANNEL
    )
    return signal_tags, idler_tags, pairs


def default_lag_half(cfg: ExperimentConfig) -> float:
    """+-5 ns by default, widened to 4x the predicted dispersed spread."""
    spread = predicted_dispersed_fwhm(
        cfg.detector_signal.jitter_fwhm,
        cfg.detector_idler.jitter_fwhm,
        cfg.source.corr_width_tau_c,
        cfg.beta2,
        cfg.sigma_omega,
    )
    return max(5000.0, 4.0 * spread)


def _config_dict(cfg: ExperimentConfig) -> dict:
    return {
        "source": dataclasses.asdict(cfg.source),
        "link": dataclasses.asdict(cfg.link),
        "detector_signal": dataclasses.asdict(cfg.detector_signal),
        "detector_idler": dataclasses.asdict(cfg.detector_idler),
        "tcspc": dataclasses.asdict(cfg.tcspc),
        "disperse_before_modulate": cfg.disperse_before_modulate,
    }


def config_from_dict(d: dict) -> ExperimentConfig:
    return validate_config(
        SourceParams(**d["source"]),
        LinkParams(**d["link"]),
        DetectorParams(**d["detector_signal"]),
        DetectorParams(**d["detector_idler"]),
        TcspcParams(**d["tcspc"]),
        disperse_before_modulate=d.get("disperse_before_modulate", False),
    )


def cmd_simulate(config_path: str, out_dir: str, seed: int | None = None) -> dict:
    """Full pipeline run; persists timetags, T3 CSVs and a run manifest."""
    cfg = load_config(config_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    signal_tags, idler_tags, _ = simulate_streams(cfg, seed)
    t3_signal = link.record_t3(signal_tags, cfg.tcspc)
    t3_idler = link.record_t3(idler_tags, cfg.tcspc)

    files = {
        "signal_timetags": "signal.timetags",
        "idler_timetags": "idler.timetags",
        "signal_t3_csv": "signal_t3.csv",
        "idler_t3_csv": "idler_t3.csv",
    }
    io.write_timetags(out / files["signal_timetags"], [signal_tags])
    io.write_timetags(out / files["idler_timetags"], [idler_tags])
    io.write_csv(
        out / files["signal_t3_csv"],
        ["nsync", "dtime_bin"],
        [t3_signal.nsync, t3_signal.dtime_bin],
    )
    io.write_csv(
        out / files["idler_t3_csv"],
        ["nsync", "dtime_bin"],
        [t3_idler.nsync, t3_idler.dtime_bin],
    )

    manifest = {
        "format": MANIFEST_FORMAT,
        "config_sha256": hashlib.sha256(Path(config_path).read_bytes()).hexdigest(),
        "seed": cfg.source.seed if seed is None else seed,
        "files": files,
        "counts": {"signal": len(signal_tags), "idler": len(idler_tags)},
        "config": _config_dict(cfg),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def load_manifest(path: str | Path) -> tuple[dict, ExperimentConfig, Path]:
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.json"
    manifest = json.loads(path.read_text())
    if manifest.get("format") != MANIFEST_FORMAT:
        raise ConfigError(f"{path}: unknown manifest format {manifest.get('format')!r}")
    return manifest, config_from_dict(manifest["config"]), path.parent


def _load_channel(run_dir: Path, manifest: dict, key: str, channel: int, duration: float):
    times = io.read_timetags(run_dir / manifest["files"][key]).get(
        channel, np.empty(0, dtype=np.float64)
    )
    return link.TimeTagStream(
        channel_id=channel,
        times=times,
        is_dark=np.zeros(len(times), dtype=bool),
        duration=duration,
    )


def cmd_analyze(
    manifest_path: str,
    arm: str,
    out_dir: str | None = None,
    window_center: float | None = None,
    window_width: float | None = None,
    svg: bool = False,
) -> dict:
    """Coincidence histogram, (possibly heralded) waveform, spectrum, summary."""
    if arm not in ANALYZE_ARMS:
        raise ParameterError(f"arm must be one of {ANALYZE_ARMS}, got {arm!r}")
    manifest, cfg, run_dir = load_manifest(manifest_path)
    out = Path(out_dir) if out_dir else run_dir
    out.mkdir(parents=True, exist_ok=True)

    duration = cfg.source.duration
    signal = _load_channel(run_dir, manifest, "signal_timetags", io.SIGNAL_CHANNEL, duration)
    idler = _load_channel(run_dir, manifest, "idler_timetags", io.IDLER_CHANNEL, duration)

    hist = correlator.cross_correlate(
        signal, idler, (-default_lag_half(cfg), default_lag_half(cfg)),
        cfg.tcspc.bin_resolution,
    )
    io.write_csv(out / "coincidence.csv", ["lag_ps", "counts"], [hist.lag_centers, hist.counts])

    window = None
    if arm == "direct-signal":
        selected = signal
    elif arm == "direct-idler":
        selected = idler
    else:
        peak = None
        if window_center is None or window_width is None:
            peak = correlator.histogram_fwhm(hist)
        if arm == "herald-signal":
            a, b, sign = signal, idler, 1.0
        else:
            a, b, sign = idler, signal, -1.0
        center = window_center if window_center is not None else sign * peak.center
        width = window_width if window_width is not None else peak.fwhm
        window = correlator.HeraldWindow(center=center, width=width)
        selected = correlator.herald(a, b, window)
        io.write_timetags(out / f"{arm}_selected.timetags", [selected])

    wave = analysis.fold_waveform(link.record_t3(selected, cfg.tcspc), cfg.tcspc)
    spec = analysis.spectrum(wave, cfg.tcspc.sampling_freq, declared_tone=cfg.link.rf_freq)
    snr = analysis.tone_snr(spec, cfg.link.rf_freq)

    t_axis = (np.arange(len(wave.counts)) + 0.5) * wave.bin_width
    io.write_csv(out / f"{arm}_waveform.csv", ["time_ps", "counts"], [t_axis, wave.counts])
    io.write_csv(
        out / f"{arm}_spectrum.csv", ["freq_hz", "power_db"], [spec.freqs, spec.power_db]
    )
    if svg:
        io.write_svg(out / f"{arm}_waveform.svg", t_axis, wave.counts, "time_ps", "counts")
        io.write_svg(
            out / f"{arm}_spectrum.svg", spec.freqs, spec.power_db, "freq_hz", "power_db"
        )
        io.write_svg(
            out / "coincidence.svg", hist.lag_centers, hist.counts, "lag_ps", "counts"
        )

    summary = {
        "arm": arm,
        "events": int(wave.total_events),
        "tone_freq_hz": cfg.link.rf_freq,
        "tone_detected": bool(snr.detected),
        "snr_db": float(snr.snr_db),
        "peak_db": float(snr.peak_db),
        "dft_noise_floor_db": float(spec.dft_noise_floor_db),
        "actual_noise_floor_db": float(spec.actual_noise_floor_db),
        "window": None
        if window is None
        else {"center_ps": window.center, "width_ps": window.width},
    }
    (out / f"{arm}_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return summary


def parse_widths(spec_str: str) -> np.ndarray:
    """Width list: 'log:MIN:MAX:N' (ps) or comma-separated ps values."""
    try:
        if spec_str.startswith("log:"):
            _, lo, hi, n = spec_str.split(":")
            return np.geomspace(float(lo), float(hi), int(n))
        return np.array(sorted(float(v) for v in spec_str.split(",")))
    except (ValueError, TypeError) as exc:
        raise ParameterError(f"cannot parse widths spec {spec_str!r}: {exc}") from exc


def cmd_sweep(
    manifest_path: str,
    arm: str,
    widths_spec: str = "log:20:5000:20",
    out_dir: str | None = None,
    window_center: float | None = None,
    svg: bool = False,
) -> dict:
    """Heralding-window-width sweep of the selected arm's tone SNR."""
    if arm not in ("signal", "idler"):
        raise ParameterError(f"arm must be 'signal' or 'idler', got {arm!r}")
    manifest, cfg, run_dir = load_manifest(manifest_path)
    out = Path(out_dir) if out_dir else run_dir
    out.mkdir(parents=True, exist_ok=True)

    duration = cfg.source.duration
    signal = _load_channel(run_dir, manifest, "signal_timetags", io.SIGNAL_CHANNEL, duration)
    idler = _load_channel(run_dir, manifest, "idler_timetags", io.IDLER_CHANNEL, duration)

    widths = parse_widths(widths_spec)
    result = analysis.window_sweep(
        signal,
        idler,
        widths,
        cfg.tcspc,
        cfg.tcspc.sampling_freq,
        cfg.link.rf_freq,
        arm=arm,
        center=window_center,
        lag_half=default_lag_half(cfg),
        hist_bin=cfg.tcspc.bin_resolution,
    )
    io.write_csv(
        out / f"sweep_{arm}.csv",
        ["width_ps", "selected_count", "snr_db"],
        [result.widths, result.selected_counts, result.snr_db],
    )
    if svg:
        io.write_svg(out / f"sweep_{arm}.svg", result.widths, result.snr_db, "width_ps", "snr_db")
    summary = {
        "arm": arm,
        "window_center_ps": result.center,
        "argmax_width_ps": result.argmax_width,
        "max_snr_db": float(np.max(result.snr_db)),
    }
    (out / f"sweep_{arm}_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"sweep[{arm}]: argmax width = {result.argmax_width:.6g} ps")
    return summary


def cmd_theory(config_path: str, out_dir: str, svg: bool = False) -> dict:
    """Reference curves for the configured link: contrast factors, merit
    curves, the dispersed classical waveform, and the fading-vs-beta2 curve."""
    cfg = load_config(config_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    omega = cfg.link.rf_omega
    factors = theory.HeraldFactors.from_link(
        window_tau=1.0,
        tau_c=cfg.source.corr_width_tau_c,
        beta2=cfg.beta2,
        sigma_omega=cfg.sigma_omega,
        rf_omega=omega,
    )
    sigma_coinc = (
        predicted_dispersed_fwhm(
            cfg.detector_signal.jitter_fwhm,
            cfg.detector_idler.jitter_fwhm,
            cfg.source.corr_width_tau_c,
            cfg.beta2,
            cfg.sigma_omega,
        )
        / 2.3548200450309493
    )
    fom_signal = theory.herald_figure_of_merit("signal", factors, sigma_coinc)
    taus = fom_signal.taus
    fom_idler = theory.herald_figure_of_merit("idler", factors, sigma_coinc, taus=taus)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # small-window regime warnings over a full curve
        c1 = np.array([theory.c1_factor(factors.with_window(t)) for t in taus])
    c2 = np.array([theory.c2_factor(factors.with_window(t)) for t in taus])
    io.write_csv(
        out / "theory_curves.csv",
        ["tau_ps", "c1", "c2", "fom_signal", "fom_idler"],
        [taus, c1, c2, fom_signal.fom, fom_idler.fom],
    )

    # Classical pulsed carrier: bandwidth matched to the biphoton marginal.
    tau_p = math.sqrt(2.0) / cfg.sigma_omega
    wave = theory.classical_pulsed_waveform(
        theory.ClassicalCarrier(
            pulse_width_tau_p=tau_p,
            rf_omega=omega,
            beta1=cfg.link.beta1,
            beta2=cfg.beta2,
            grid=_auto_grid(tau_p, cfg.beta2, omega),
        )
    )
    io.write_csv(
        out / "classical_waveform.csv", ["time_ps", "intensity"], [wave.time, wave.intensity]
    )

    beta2_null = 0.5 * math.pi / omega**2
    beta2_grid = np.linspace(0.0, 1.25 * beta2_null, 26)
    fading = np.array(
        [
            theory.classical_pulsed_waveform(
                theory.ClassicalCarrier(
                    pulse_width_tau_p=tau_p,
                    rf_omega=omega,
                    beta1=0.0,
                    beta2=b2,
                    grid=_auto_grid(tau_p, b2, omega),
                )
            ).rf_amplitude
            for b2 in beta2_grid
        ]
    )
    io.write_csv(
        out / "classical_fading.csv", ["beta2_ps2", "rf_amplitude"], [beta2_grid, fading]
    )
    if svg:
        io.write_svg(out / "theory_curves.svg", taus, c1, "tau_ps", "c1")
        io.write_svg(out / "classical_waveform.svg", wave.time, wave.intensity, "time_ps", "intensity")
        io.write_svg(out / "classical_fading.svg", beta2_grid, fading, "beta2_ps2", "rf_amplitude")

    summary = {
        "rf_amplitude": wave.rf_amplitude,
        "rf_phase": wave.rf_phase,
        "beta2_ps2": cfg.beta2,
        "tau_p_ps": tau_p,
    }
    (out / "theory_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return summary


def _auto_grid(tau_p: float, beta2: float, omega: float) -> tuple[float, float, float]:
    broadened = math.hypot(tau_p, 2.0 * abs(beta2) / tau_p)
    half = 3.5 * broadened + 4.0 * abs(beta2) * omega
    dt = min(2.0 * math.pi / omega, tau_p) / 8.001
    return (-half, half, dt)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pairlink",
        description="Entangled-pair microwave-link Monte Carlo and analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run the event-level pipeline")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out", required=True)
    p_sim.add_argument("--seed", type=int, default=None, help="override config seed")

    p_ana = sub.add_parser("analyze", help="histogram + waveform + spectrum + summary")
    p_ana.add_argument("--manifest", required=True, help="manifest.json or run dir")
    p_ana.add_argument("--arm", required=True, choices=ANALYZE_ARMS)
    p_ana.add_argument("--out", default=None)
    p_ana.add_argument("--window-center", type=float, default=None, help="ps")
    p_ana.add_argument("--window-width", type=float, default=None, help="ps")
    p_ana.add_argument("--svg", action="store_true")

    p_swp = sub.add_parser("sweep", help="heralding-window width sweep")
    p_swp.add_argument("--manifest", required=True)
    p_swp.add_argument("--arm", required=True, choices=["signal", "idler"])
    p_swp.add_argument("--widths", default="log:20:5000:20")
    p_swp.add_argument("--out", default=None)
    p_swp.add_argument("--window-center", type=float, default=None)
    p_swp.add_argument("--svg", action="store_true")

    p_thy = sub.add_parser("theory", help="reference curves for a config")
    p_thy.add_argument("--config", required=True)
    p_thy.add_argument("--out", required=True)
    p_thy.add_argument("--svg", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            manifest = cmd_simulate(args.config, args.out, args.seed)
            print(
                f"simulate: {manifest['counts']['signal']} signal / "
                f"{manifest['counts']['idler']} idler events -> {args.out}"
            )
        elif args.command == "analyze":
            summary = cmd_analyze(
                args.manifest,
                args.arm,
                args.out,
                args.window_center,
                args.window_width,
                args.svg,
            )
            state = "detected" if summary["tone_detected"] else "not detected"
            print(
                f"analyze[{args.arm}]: tone {state}, SNR {summary['snr_db']:.2f} dB "
                f"({summary['events']} events)"
            )
        elif args.command == "sweep":
            cmd_sweep(
                args.manifest, args.arm, args.widths, args.out, args.window_center, args.svg
            )
        elif args.command == "theory":
            summary = cmd_theory(args.config, args.out, args.svg)
            print(
                f"theory: rf_amplitude {summary['rf_amplitude']:.6g}, "
                f"phase {summary['rf_phase']:.6g} rad"
            )
    except (ConfigError, ParameterError, ContractError, RecordError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3
    except AnalysisError as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return 4
    except PairlinkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
