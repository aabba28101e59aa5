import math

import numpy as np
import pytest
from scipy import stats
from scipy.special import jv

from pairlink.errors import ParameterError, RecordError
from pairlink.link import T3Stream, TimeTagStream, detect, disperse, modulate, record_t3
from pairlink.params import DetectorParams, LinkParams, TcspcParams
from pairlink.source import PairStream, generate_pairs
from pairlink.params import SourceParams


GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def comb_pairs(n: int, spacing_ps: float) -> PairStream:
    """Deterministic dense comb of idler times.

    The spacing must be incommensurate with any period under test so the
    sampled phases equidistribute; golden-ratio multiples of the RF period
    work well.
    """
    t = (np.arange(n) + 0.5) * spacing_ps
    return PairStream(
        t_signal=t.copy(),
        t_idler=t,
        detuning=np.zeros(n),
        pair_id=np.arange(n, dtype=np.uint64),
        duration=n * spacing_ps / 1e12,
    )


RF_PERIOD_PS = 500.0  # 2 GHz default


def harmonic(times: np.ndarray, omega: float, k: int) -> complex:
    """Mean of exp(-i k omega t): the k-th harmonic content of the
    retention profile, normalized so a flat profile gives 0."""
    return complex(np.mean(np.exp(-1j * k * omega * times)))


class TestModulate:
    def test_carrier_only_is_half_thinning(self):
        pairs = comb_pairs(200_000, RF_PERIOD_PS * GOLDEN)
        link = LinkParams(rf_mod_index=0.0, mzm_bias_phase=math.pi / 2.0)
        kept = modulate(pairs, link, seed=10)
        frac = len(kept) / len(pairs)
        assert abs(frac - 0.5) < 5.0 * math.sqrt(0.25 / len(pairs))

    def test_quadrature_yields_odd_harmonics_only(self):
        # Jacobi-Anger: sin(beta cos x) has only odd harmonics, so at
        # quadrature the fundamental is J1(beta) and HD2 vanishes.
        beta = 0.6
        pairs = comb_pairs(4_000_000, RF_PERIOD_PS * GOLDEN)
        link = LinkParams(rf_mod_index=beta, mzm_bias_phase=math.pi / 2.0)
        kept = modulate(pairs, link, seed=11)
        m = len(kept)
        noise = 1.0 / math.sqrt(2.0 * m)
        h1 = abs(harmonic(kept.t_idler, link.rf_omega, 1))
        h2 = abs(harmonic(kept.t_idler, link.rf_omega, 2))
        assert h1 == pytest.approx(jv(1, beta), rel=0.02)
        assert h2 < 4.0 * noise

    def test_bias_offset_second_harmonic_matches_bessel_ratio(self):
        beta, bias = 0.6, math.pi / 2.0 + 0.3
        pairs = comb_pairs(4_000_000, RF_PERIOD_PS * GOLDEN)
        link = LinkParams(rf_mod_index=beta, mzm_bias_phase=bias)
        kept = modulate(pairs, link, seed=12)
        h1 = abs(harmonic(kept.t_idler, link.rf_omega, 1))
        h2 = abs(harmonic(kept.t_idler, link.rf_omega, 2))
        measured_db = 20.0 * math.log10(h2 / h1)
        expected_db = 20.0 * math.log10(
            abs(math.cos(bias)) * jv(2, beta) / (abs(math.sin(bias)) * jv(1, beta))
        )
        assert measured_db == pytest.approx(expected_db, abs=3.0)

    def test_survivors_are_ordered_subset(self):
        pairs = generate_pairs(SourceParams(pair_rate=1e5, duration=0.1, seed=13))
        kept = modulate(pairs, LinkParams(), seed=14)
        assert np.all(np.isin(kept.pair_id, pairs.pair_id))
        assert np.all(np.diff(kept.t_signal) >= 0)

    def test_overdrive_warns(self):
        pairs = comb_pairs(100, RF_PERIOD_PS * GOLDEN)
        with pytest.warns(UserWarning, match="overdrive"):
            modulate(pairs, LinkParams(rf_mod_index=3.5), seed=1)

    def test_carrier_only_commutes_with_dispersion(self):
        pairs = generate_pairs(SourceParams(pair_rate=2e5, duration=0.05, seed=15))
        link = LinkParams(rf_mod_index=0.0)
        mod_then_disp = disperse(modulate(pairs, link, seed=16), 200.0, 319.8)
        disp_then_mod = modulate(disperse(pairs, 200.0, 319.8), link, seed=16)
        assert np.array_equal(mod_then_disp.pair_id, disp_then_mod.pair_id)
        assert np.array_equal(mod_then_disp.t_idler, disp_then_mod.t_idler)


class TestDisperse:
    def test_zero_beta2_is_pure_delay(self):
        pairs = generate_pairs(SourceParams(pair_rate=1e5, duration=0.05, seed=17))
        out = disperse(pairs, beta1=123.0, beta2=0.0)
        assert np.allclose(out.t_idler - pairs.t_idler, 123.0)
        assert np.array_equal(out.t_signal, pairs.t_signal)

    def test_zero_detuning_event_only_delayed(self):
        pairs = PairStream(
            t_signal=np.array([0.0]),
            t_idler=np.array([10.0]),
            detuning=np.array([0.0]),
            pair_id=np.array([0], dtype=np.uint64),
            duration=1e-9,
        )
        out = disperse(pairs, beta1=50.0, beta2=500.0)
        assert out.t_idler[0] == pytest.approx(60.0)

    def test_added_spread_is_2_beta2_sigma(self, rng):
        n = 200_000
        sigma_w, beta2 = 0.789, 319.6
        pairs = PairStream(
            t_signal=np.sort(rng.random(n) * 1e9),
            t_idler=np.zeros(n),
            detuning=rng.normal(0.0, sigma_w, n),
            pair_id=np.arange(n, dtype=np.uint64),
            duration=1e-3,
        )
        pairs.t_idler = pairs.t_signal.copy()
        out = disperse(pairs, beta1=0.0, beta2=beta2)
        added = out.t_idler - pairs.t_idler
        assert added.std() == pytest.approx(2.0 * beta2 * sigma_w, rel=0.02)


class TestDetect:
    def test_zero_efficiency_zero_darks(self):
        out = detect(np.arange(100.0), DetectorParams(efficiency=0.0, dark_rate=0.0),
                     1.0, seed=20)
        assert len(out) == 0

    def test_dark_count_poisson(self):
        out = detect(
            np.empty(0),
            DetectorParams(efficiency=0.0, jitter_fwhm=0.0, dark_rate=1e3),
            10.0,
            seed=21,
        )
        assert abs(len(out) - 1e4) < 5.0 * math.sqrt(1e4)
        assert np.all(out.is_dark)

    def test_jitter_spread_on_comb(self):
        spacing = 5000.0
        comb = (np.arange(2000) + 0.5) * spacing
        out = detect(
            comb,
            DetectorParams(efficiency=1.0, jitter_fwhm=50.0, dark_rate=0.0),
            comb[-1] * 1.001e-12,
            seed=22,
        )
        residual = out.times % spacing - spacing / 2.0
        measured_fwhm = residual.std() * 2.0 * math.sqrt(2.0 * math.log(2.0))
        assert measured_fwhm == pytest.approx(50.0, rel=0.05)

    def test_identity_configuration(self):
        times = np.sort(np.random.default_rng(5).random(1000) * 1e6)
        out = detect(
            times,
            DetectorParams(efficiency=1.0, jitter_fwhm=0.0, dark_rate=0.0),
            1e-5,
            seed=23,
        )
        assert np.array_equal(out.times, times)
        assert not out.is_dark.any()

    def test_bad_efficiency(self):
        with pytest.raises(ParameterError):
            detect(np.empty(0), DetectorParams(efficiency=1.5), 1.0, seed=0)


class TestRecordT3:
    def stream(self, times, duration=1.0):
        times = np.asarray(times, dtype=np.float64)
        return TimeTagStream(0, times, np.zeros(len(times), dtype=bool), duration)

    def test_sync_index_arithmetic(self):
        tc = TcspcParams(sync_period=100.0, bin_resolution=8.0, measurement_time=1.0)
        t3 = record_t3(self.stream([250_000.0]), tc)  # 250 ns
        assert t3.nsync[0] == 2
        assert t3.dtime_bin[0] == 6250

    def test_floor_quantization(self):
        tc = TcspcParams(measurement_time=1.0)
        t3 = record_t3(self.stream([13.0]), tc)
        assert t3.dtime_bin[0] == 1

    def test_uniform_times_flat_bins(self, rng):
        tc = TcspcParams(measurement_time=1.0)
        times = np.sort(rng.random(300_000) * 1e9)
        t3 = record_t3(self.stream(times), tc)
        counts = np.bincount(t3.dtime_bin, minlength=tc.n_bins_per_sync)
        assert stats.chisquare(counts).pvalue > 0.01

    def test_negative_time_is_record_error(self):
        with pytest.raises(RecordError):
            record_t3(self.stream([-1.0, 5.0]), TcspcParams())

    def test_lossless_modulo_quantization(self, rng):
        tc = TcspcParams(measurement_time=1.0)
        times = np.sort(rng.random(10_000) * 1e8)
        t3 = record_t3(self.stream(times), tc)
        rebuilt = t3.nsync * tc.sync_period_ps + t3.dtime_bin * tc.bin_resolution
        assert np.all(np.abs(rebuilt - times) < tc.bin_resolution)

    def test_events_after_measurement_span_dropped(self):
        tc = TcspcParams(measurement_time=1e-9)  # 1 ns recording span
        t3 = record_t3(self.stream([500.0, 999.9, 1000.1, 2000.0]), tc)
        assert len(t3) == 2
