import math

import numpy as np
import pytest
from scipy import stats

from pairlink import analysis
from pairlink.analysis import (
    Waveform,
    fold_waveform,
    sfdr_fit,
    spectral_power_sum,
    spectrum,
    tone_snr,
    window_sweep,
)
from pairlink.errors import DegenerateInputError, FitError, ParameterError
from pairlink.link import T3Stream, detect, modulate, record_t3
from pairlink.params import DetectorParams, LinkParams, SourceParams, TcspcParams
from pairlink.source import generate_pairs

TC = TcspcParams(sync_period=100.0, bin_resolution=8.0, measurement_time=1.0)
FS = TC.sampling_freq  # 125 GHz
F_RF = 2e9


def t3(dtime_bins, tc=TC):
    dtime = np.asarray(dtime_bins, dtype=np.int64)
    return T3Stream(nsync=np.zeros(len(dtime), dtype=np.int64), dtime_bin=dtime, tcspc=tc)


class TestFoldWaveform:
    def test_single_record(self):
        wave = fold_waveform(t3([2]), TC)
        assert wave.counts[2] == 1
        assert wave.counts.sum() == 1
        assert len(wave.counts) == 12500

    def test_uniform_records_flat(self, rng):
        wave = fold_waveform(t3(rng.integers(0, 12500, 500_000)), TC)
        assert stats.chisquare(wave.counts).pvalue > 0.01

    def test_no_event_lost(self, rng):
        bins = rng.integers(0, 12500, 10_000)
        wave = fold_waveform(t3(bins), TC)
        assert wave.total_events == len(bins)
        assert wave.counts.sum() == len(bins)

    def test_pipeline_waveform_fits_cosine_with_poisson_residual(self):
        pairs = generate_pairs(SourceParams(pair_rate=2e6, duration=0.2, seed=31))
        kept = modulate(pairs, LinkParams(), seed=32)
        idler = detect(np.sort(kept.t_idler), DetectorParams(dark_rate=0.0), 0.2, 33, 1)
        tc = TcspcParams(measurement_time=0.2)
        wave = fold_waveform(record_t3(idler, tc), tc)

        t = (np.arange(len(wave.counts)) + 0.5) * tc.bin_resolution
        omega = 2.0 * math.pi * F_RF * 1e-12
        design = np.column_stack([np.ones_like(t), np.cos(omega * t), np.sin(omega * t)])
        coef, *_ = np.linalg.lstsq(design, wave.counts.astype(float), rcond=None)
        residual = wave.counts - design @ coef
        # Poisson noise: residual variance should match the mean count level.
        assert residual.var() / wave.counts.mean() == pytest.approx(1.0, abs=0.1)
        amplitude = math.hypot(coef[1], coef[2])
        assert amplitude / coef[0] > 0.4  # strong fundamental present


class TestSpectrum:
    def test_dft_bookkeeping_constants(self, rng):
        wave = fold_waveform(t3(rng.integers(0, 12500, 100_000)), TC)
        spec = spectrum(wave, FS)
        assert spec.n_fft == 16384
        assert spec.bin_bandwidth == pytest.approx(7.629e6, abs=1e3)
        assert spec.actual_noise_floor_db - spec.dft_noise_floor_db == pytest.approx(
            10.0 * math.log10(8192.0), abs=1e-9
        )

    def test_parseval(self):
        n = 12500
        t = np.arange(n)
        counts = np.round(5000.0 + 1000.0 * np.cos(2.0 * math.pi * 200.0 * t / n))
        wave = Waveform(bin_width=8.0, counts=counts.astype(np.int64), total_events=int(counts.sum()))
        spec = spectrum(wave, FS)
        x = counts - counts.mean()
        assert spectral_power_sum(spec) == pytest.approx(float(np.sum(x * x)), rel=1e-9)

    def test_all_zero_rejected(self):
        wave = Waveform(bin_width=8.0, counts=np.zeros(100, dtype=np.int64), total_events=0)
        with pytest.raises(DegenerateInputError):
            spectrum(wave, FS)

    def test_declared_tone_excluded_from_floor(self, rng):
        # Median floor recomputed independently with the documented exclusions.
        counts = rng.poisson(100.0, 12500).astype(np.int64)
        wave = Waveform(8.0, counts, int(counts.sum()))
        spec = spectrum(wave, FS, declared_tone=F_RF)
        excluded = np.zeros(len(spec.freqs), dtype=bool)
        excluded[:3] = True
        for m in range(1, 5):
            k = int(round(m * F_RF / spec.bin_bandwidth))
            excluded[max(0, k - 2) : k + 3] = True
        assert spec.dft_noise_floor_db == pytest.approx(
            float(np.median(spec.power_db[~excluded])), abs=1e-12
        )


class TestToneSnr:
    def test_noise_only_not_detected(self, rng):
        counts = rng.poisson(200.0, 12500).astype(np.int64)
        spec = spectrum(Waveform(8.0, counts, int(counts.sum())), FS)
        result = tone_snr(spec, F_RF)
        assert not result.detected
        assert result.snr_db < 0

    def test_constructed_tone_snr(self, rng):
        # Tone calibrated 20 dB above the actual noise floor of Poisson noise.
        n, mu = 12500, 1000.0
        t = np.arange(n)
        tone_cycles = 200  # = 2 GHz at 8 ps bins
        clean = np.cos(2.0 * math.pi * tone_cycles * t / n)
        peak_unit = np.max(np.abs(np.fft.rfft(clean - clean.mean(), 16384))) ** 2
        floor_lin = math.log(2.0) * n * mu * 8192.0  # median |X|^2 times N/2
        amplitude = math.sqrt(100.0 * floor_lin / peak_unit)

        counts = rng.poisson(mu + amplitude * clean).astype(np.int64)
        spec = spectrum(Waveform(8.0, counts, int(counts.sum())), FS, declared_tone=F_RF)
        result = tone_snr(spec, F_RF)
        assert result.detected
        assert result.snr_db == pytest.approx(20.0, abs=1.0)

    def test_snr_decreases_with_count_thinning(self, rng):
        n, mu = 12500, 400.0
        t = np.arange(n)
        profile = mu * (1.0 + 0.5 * np.cos(2.0 * math.pi * 200.0 * t / n))
        full = rng.poisson(profile).astype(np.int64)
        thinned = rng.binomial(full, 0.1)
        snr_full = tone_snr(spectrum(Waveform(8.0, full, int(full.sum())), FS, F_RF), F_RF)
        snr_thin = tone_snr(
            spectrum(Waveform(8.0, thinned, int(thinned.sum())), FS, F_RF), F_RF
        )
        assert snr_full.snr_db > snr_thin.snr_db + 5.0

    def test_out_of_range_frequency(self, rng):
        counts = rng.poisson(10.0, 128).astype(np.int64)
        spec = spectrum(Waveform(8.0, counts, int(counts.sum())), FS)
        with pytest.raises(ParameterError):
            tone_snr(spec, FS)


class TestSfdrFit:
    def make_points(self, pins):
        return [(p, p - 30.0, 2.0 * p - 80.0) for p in pins]

    def test_closed_form_crossing(self):
        result = sfdr_fit(self.make_points([0.0, 5.0, 10.0]), noise_floor_1hz_db=-100.0)
        assert result.sfdr2_db_hz_half == pytest.approx(60.0, abs=0.1)
        assert result.fundamental_fit[0] == pytest.approx(1.0, abs=0.02)
        assert result.hd2_fit[0] == pytest.approx(2.0, abs=0.02)

    def test_lower_floor_raises_sfdr(self):
        result = sfdr_fit(self.make_points([0.0, 5.0, 10.0]), noise_floor_1hz_db=-120.0)
        assert result.sfdr2_db_hz_half == pytest.approx(70.0, abs=0.1)

    def test_degenerate_points(self):
        with pytest.raises(FitError):
            sfdr_fit([(5.0, -25.0, -70.0)] * 4, -100.0)

    def test_too_few_points(self):
        with pytest.raises(ParameterError):
            sfdr_fit(self.make_points([0.0, 5.0]), -100.0)

    def test_no_crossing(self):
        points = [(p, p - 30.0, -90.0) for p in [0.0, 5.0, 10.0]]
        with pytest.raises(FitError):
            sfdr_fit(points, -100.0)


class TestWindowSweep:
    def small_run(self, eff_signal=1.0):
        duration = 0.1
        pairs = generate_pairs(SourceParams(pair_rate=2e6, duration=duration, seed=41))
        kept = modulate(pairs, LinkParams(), seed=42)
        signal = detect(
            pairs.t_signal,
            DetectorParams(efficiency=eff_signal, dark_rate=0.0),
            duration,
            43,
            0,
        )
        idler = detect(
            np.sort(kept.t_idler), DetectorParams(efficiency=0.7, dark_rate=0.0),
            duration, 44, 1,
        )
        return signal, idler, TcspcParams(measurement_time=duration)

    def test_saturated_window_equals_direct_arm(self):
        # With unit signal efficiency and no darks, a window far wider than
        # the peak selects every idler event, so the heralded idler spectrum
        # is the direct idler spectrum.
        signal, idler, tc = self.small_run(eff_signal=1.0)
        result = window_sweep(signal, idler, [700.0], tc, FS, F_RF, arm="idler")
        assert result.points[0].selected_count == len(idler)
        direct = tone_snr(
            spectrum(fold_waveform(record_t3(idler, tc), tc), FS, F_RF), F_RF
        )
        assert result.points[0].snr_db == direct.snr_db

    def test_counts_monotone_in_width(self):
        signal, idler, tc = self.small_run(eff_signal=0.6)
        result = window_sweep(
            signal, idler, np.geomspace(10.0, 2000.0, 8), tc, FS, F_RF, arm="signal"
        )
        counts = result.selected_counts
        assert np.all(np.diff(counts) >= 0)

    def test_empty_widths_rejected(self):
        signal, idler, tc = self.small_run()
        with pytest.raises(ParameterError):
            window_sweep(signal, idler, [], tc, FS, F_RF)

    def test_unsorted_widths_rejected(self):
        signal, idler, tc = self.small_run()
        with pytest.raises(ParameterError):
            window_sweep(signal, idler, [100.0, 50.0], tc, FS, F_RF)
