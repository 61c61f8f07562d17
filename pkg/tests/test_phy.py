import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bfdm_phy.channel import MultipathChannel, add_noise, apply_multipath
from bfdm_phy.errors import (
    DimensionError,
    FramingError,
    IllConditionedError,
    LayoutError,
    ParameterError,
)
from bfdm_phy.gabor import Lattice, SampledSignal, TFOffset, tf_shift
from bfdm_phy.interference import pair_ambiguity
from bfdm_phy.phy import (
    FrameLayout,
    PreambleConfig,
    PuschConfig,
    bfdm_demodulate,
    bfdm_modulate,
    calibrate_beta,
    detect_signature,
    detect_signatures,
    estimate_channel,
    ofdm_prach_demodulate,
    ofdm_prach_modulate,
    power_delay_profiles,
    preamble_coefficients,
    pusch_demodulate,
    pusch_modulate,
    signature_to_preamble,
    tikhonov_weight,
    zc_root,
)
from bfdm_phy.phy.qam import constellation, hard_decision, random_symbols
from bfdm_phy.pulses import spline_pair

SMALL = Lattice(80.0, 1 / 64)


@pytest.fixture(scope="module")
def small_pair():
    return spline_pair(0.85, SMALL, 1.0, 640)


def small_layout(k=8, **kw):
    bins = np.arange(-20, 21)
    return FrameLayout(64, 80, k, 640, bins[:25], bins[25:], **kw)


class TestQam:
    @pytest.mark.parametrize("name, size", [("4qam", 4), ("bpsk", 2), ("16qam", 16)])
    def test_unit_power(self, name, size):
        pts = constellation(name)
        assert pts.size == size
        assert np.mean(np.abs(pts) ** 2) == pytest.approx(1.0)

    def test_decisions_invert_mapping(self):
        idx, x = random_symbols(np.random.default_rng(0), (50,), "16qam")
        np.testing.assert_array_equal(hard_decision(x * 1.0001 + 0.01, "16qam"), idx)

    def test_unknown(self):
        with pytest.raises(Exception):
            constellation("8psk")


class TestZadoffChu:
    @pytest.mark.parametrize("u", [1, 2, 25, 129, 838])
    def test_first_sample_and_modulus(self, u):
        x = zc_root(u, 839)
        assert x[0] == pytest.approx(1.0)
        np.testing.assert_allclose(np.abs(x), 1.0, atol=1e-12)

    @pytest.mark.parametrize("u", [1, 7, 400])
    def test_ideal_cyclic_autocorrelation(self, u):
        x = zc_root(u, 839)
        for lag in (1, 2, 13, 420, 838):
            assert abs(np.vdot(x, np.roll(x, lag))) < 1e-9

    def test_invalid_root(self):
        with pytest.raises(ParameterError):
            zc_root(0, 839)
        with pytest.raises(ParameterError):
            zc_root(3, 840)


class TestSignatureMapping:
    def test_shifts_per_root(self):
        cfg = PreambleConfig(839, 13)
        assert cfg.n_shifts == 64 and cfg.n_root == 1

    def test_first_signature_is_unshifted_root(self):
        cfg = PreambleConfig(839, 13)
        np.testing.assert_array_equal(signature_to_preamble(0, cfg), zc_root(1, 839))

    def test_second_root(self):
        cfg = PreambleConfig(839, 30)
        V = cfg.n_shifts
        assert cfg.split(V) == (1, 0)
        np.testing.assert_array_equal(signature_to_preamble(V, cfg), zc_root(cfg.roots[1], 839))

    def test_cyclic_shift(self):
        cfg = PreambleConfig(839, 13)
        x = zc_root(1, 839)
        np.testing.assert_array_equal(signature_to_preamble(3, cfg), np.roll(x, -39))

    def test_roots_ascending_coprime(self):
        cfg = PreambleConfig(61, 3, n_cf=10)
        assert cfg.roots == (1, 2, 3)
        assert cfg.n_signatures == 54

    def test_out_of_range(self):
        cfg = PreambleConfig(839, 13, n_cf=4)
        with pytest.raises(ParameterError):
            signature_to_preamble(60, cfg)
        with pytest.raises(ParameterError):
            signature_to_preamble(-1, cfg)

    def test_invalid_config(self):
        with pytest.raises(ParameterError):
            PreambleConfig(840, 13)
        with pytest.raises(ParameterError):
            PreambleConfig(839, 0)
        with pytest.raises(ParameterError):
            PreambleConfig(839, 13, n_cf=64)

    def test_spectrum_is_unimodular(self):
        X = preamble_coefficients(5, PreambleConfig(839, 13))
        np.testing.assert_allclose(np.abs(X), 1.0, atol=1e-9)


class TestFrameLayout:
    def test_collision(self):
        with pytest.raises(LayoutError):
            FrameLayout(64, 80, 8, 640, [1, 2], [2, 3])

    def test_frame_multiple_of_fft(self):
        with pytest.raises(LayoutError):
            FrameLayout(64, 80, 1, 80, [1], [2])

    def test_grid_rejects_foreign_data_bins(self):
        lay = small_layout()
        with pytest.raises(LayoutError):
            lay.grid(data=np.ones((8, 1)), data_bins=[0])

    def test_beta_gives_unit_psd(self):
        lay = small_layout()
        beta = calibrate_beta(lay)
        assert beta**2 * lay.n_fft / lay.n == pytest.approx(1.0)


class TestBfdmModem:
    def test_rect_pulse_reduces_to_inverse_dft(self):
        lay = FrameLayout(32, 32, 1, 32, np.arange(-4, 4), np.arange(4, 8))
        X = np.random.default_rng(0).standard_normal((1, 32)) + 0j
        X[:, 16:24] = 0  # only active bins carry data
        g = SampledSignal(np.ones(32), 1.0, 0)
        s = bfdm_modulate(X, g, lay)
        np.testing.assert_allclose(s.samples, 32 * np.fft.ifft(X[0]), atol=1e-12)

    def test_loopback(self, small_pair):
        lay = small_layout(beta=0.7)
        rng = np.random.default_rng(1)
        _, xd = random_symbols(rng, (8, lay.data_bins.size))
        xp = np.exp(2j * np.pi * rng.random(lay.preamble_bins.size))
        grid = lay.grid(preamble=xp, data=xd)
        Y = bfdm_demodulate(bfdm_modulate(grid, small_pair.tx, lay), small_pair.rx, lay)
        assert np.abs(Y - grid).max() < 1e-10

    def test_burst_offset_in_frame(self, small_pair):
        lay = small_layout(k=3, n_frame=640, offset=250)
        grid = lay.grid(preamble=np.exp(1j * lay.preamble_bins))
        Y = bfdm_demodulate(bfdm_modulate(grid, small_pair.tx, lay), small_pair.rx, lay)
        assert np.abs(Y - grid).max() < 1e-10

    def test_single_bin_delay_is_phase_ramp(self, small_pair):
        lay = small_layout(k=1, n_frame=640)
        grid = np.zeros((1, 64), complex)
        grid[0, 3] = 1.0
        s = bfdm_modulate(grid, small_pair.tx, lay)
        for d in (1, 2, 5):
            Y = bfdm_demodulate(s.with_samples(np.roll(s.samples, d)), small_pair.rx, lay)
            A = abs(pair_ambiguity(small_pair, TFOffset(float(d), 0.0)))
            assert abs(Y[0, 3]) == pytest.approx(A, abs=1e-12)
            assert np.angle(Y[0, 3] * np.exp(2j * np.pi * 3 * d / 64)) == pytest.approx(0.0, abs=1e-9)

    def test_one_sample_delay_keeps_magnitude_at_desk_scale(self):
        ts = 1 / 1.92e6
        pair = spline_pair(0.85, Lattice(1920 * ts, 1 / (1536 * ts)), ts, 7680)
        lay = FrameLayout(1536, 1920, 1, 7680, np.arange(-30, 31), [], ts=ts, n_frame=7680, offset=3840)
        grid = np.zeros((1, 1536), complex)
        grid[0, 7] = 1.0
        s = bfdm_modulate(grid, pair.tx, lay)
        Y = bfdm_demodulate(s.with_samples(np.roll(s.samples, 1)), pair.rx, lay)
        assert abs(abs(Y[0, 7]) - 1.0) < 1e-6
        assert np.angle(Y[0, 7] * np.exp(2j * np.pi * 7 / 1536)) == pytest.approx(0.0, abs=1e-9)

    @settings(max_examples=10, deadline=None)
    @given(st.integers(-20, 20), st.integers(-10, 10), st.integers(0, 63))
    def test_energy_bookkeeping(self, small_pair, d, f10, b):
        # One active atom: demodulated power equals |A(nu)|^2 times input power.
        lay = FrameLayout(64, 80, 8, 640, [b - 32], [])
        grid = np.zeros((8, 64), complex)
        grid[0, (b - 32) % 64] = 2.0
        s = bfdm_modulate(grid, small_pair.tx, lay)
        # Whole cycles per frame keep the modulation continuous across the wrap.
        nu = TFOffset(float(d), f10 / 640)
        Y = bfdm_demodulate(tf_shift(s, nu), small_pair.rx, lay)
        A2 = abs(pair_ambiguity(small_pair, nu)) ** 2
        assert abs(Y[0, (b - 32) % 64]) ** 2 == pytest.approx(4.0 * A2, rel=0.01)

    def test_pulse_length_checks(self, small_pair):
        lay = FrameLayout(64, 80, 8, 640, [0], [], n_frame=1280)
        with pytest.raises(FramingError):
            bfdm_demodulate(SampledSignal(np.zeros(640), 1.0), small_pair.rx, lay)
        lay2 = FrameLayout(64, 80, 1, 100, [0], [], n_frame=640)
        with pytest.raises(LayoutError):
            bfdm_demodulate(SampledSignal(np.zeros(640), 1.0), small_pair.rx, lay2)


class TestOfdmPrach:
    def layout(self):
        return FrameLayout(64, 100, 2, 80, np.arange(-10, 11), [], n_frame=256, offset=20)

    def test_loopback(self):
        lay = self.layout()
        grid = lay.grid(preamble=np.exp(1j * np.arange(21)))
        Y = ofdm_prach_demodulate(ofdm_prach_modulate(grid, lay, 16), lay, 16)
        assert np.abs(Y - grid).max() < 1e-10

    @pytest.mark.parametrize("d", [1, 8, 16])
    def test_delay_inside_prefix(self, d):
        lay = self.layout()
        bins = lay.preamble_bins
        grid = lay.grid(preamble=np.exp(1j * np.arange(21)))
        s = ofdm_prach_modulate(grid, lay, 16)
        Y = ofdm_prach_demodulate(s.with_samples(np.roll(s.samples, d)), lay, 16)
        ramp = np.exp(-2j * np.pi * bins * d / 64)
        np.testing.assert_allclose(Y[:, bins % 64], grid[:, bins % 64] * ramp, atol=1e-10)

    @pytest.mark.parametrize("d", [-5, 20])
    def test_delay_outside_prefix_interferes(self, d):
        lay = self.layout()
        bins = lay.preamble_bins
        grid = lay.grid(preamble=np.exp(1j * np.arange(21)))
        s = ofdm_prach_modulate(grid, lay, 16)
        Y = ofdm_prach_demodulate(s.with_samples(np.roll(s.samples, d)), lay, 16)
        leak = np.delete(np.arange(64), bins % 64)
        assert np.abs(Y[:, leak]).max() > 1e-3

    def test_framing_errors(self):
        lay = self.layout()
        with pytest.raises(FramingError):
            ofdm_prach_demodulate(SampledSignal(np.zeros(100), 1.0), lay, 16)
        with pytest.raises(FramingError):
            ofdm_prach_modulate(lay.grid(), lay, 40)


class TestPusch:
    def cfg(self):
        bins = np.concatenate([np.arange(-20, -2), np.arange(3, 21)])
        return PuschConfig(64, bins, (np.arange(18), np.arange(18, 36)), 6, 5, 7, 2, 1.0)

    @pytest.mark.parametrize("spread", [True, False])
    def test_loopback(self, spread):
        cfg = self.cfg()
        _, x = random_symbols(np.random.default_rng(2), (cfg.n_symbols, cfg.n_subcarriers))
        s = pusch_modulate(x, cfg, spread)
        assert len(s) == cfg.frame_len == 2 * (6 + 6 * 5 + 7 * 64)
        assert np.abs(pusch_demodulate(s, cfg, spread) - x).max() < 1e-10

    def test_unit_psd(self):
        cfg = self.cfg()
        _, x = random_symbols(np.random.default_rng(3), (cfg.n_symbols, cfg.n_subcarriers))
        s = pusch_modulate(x, cfg, False)
        per_sample = np.mean(np.abs(s.samples) ** 2)
        assert per_sample == pytest.approx(cfg.n_subcarriers / 64, rel=0.05)

    def test_equalizer_inverts_channel(self):
        cfg = self.cfg()
        ch = MultipathChannel([0, 2, 4], [0.8, 0.4j, -0.3], 5)
        _, x = random_symbols(np.random.default_rng(4), (cfg.n_symbols, cfg.n_subcarriers))
        s = pusch_modulate(x, cfg, True)
        r = apply_multipath(s, ch, "circular")
        H = ch.frequency_response(cfg.bins, 64)
        assert np.abs(pusch_demodulate(r, cfg, True, H) - x).max() < 1e-10

    def test_bad_allocation(self):
        with pytest.raises(LayoutError):
            PuschConfig(64, [1, 2, 3], (np.arange(2),), 6, 5)
        with pytest.raises(FramingError):
            pusch_demodulate(SampledSignal(np.zeros(10), 1.0), self.cfg())


def delayed_band(sig, cfg, delay, n_fft):
    """Preamble-bin coefficients of a signature received ``delay`` samples late."""
    h = (cfg.n_zc - 1) // 2
    bins = np.arange(-h, h + 1)
    return preamble_coefficients(sig, cfg) * np.exp(-2j * np.pi * bins * delay / n_fft)


class TestDetection:
    cfg = PreambleConfig(839, 13)
    ts = 1 / 30.72e6
    lay = FrameLayout(24576, 30720, 1, 30720, np.arange(-419, 420), [], ts=ts, n_frame=122880)

    def test_signature_17_clean(self):
        res = detect_signature(preamble_coefficients(17, self.cfg), self.cfg, self.lay)
        assert res.signature == 17 and res.delay == 0.0

    def test_delay_100_samples(self):
        y = delayed_band(17, self.cfg, 100, 24576)
        res = detect_signature(y, self.cfg, self.lay)
        assert res.signature == 17
        assert abs(res.delay - 100 * self.ts) <= 24576 / 839 * self.ts

    def test_every_signature(self):
        for s in range(64):
            assert detect_signature(preamble_coefficients(s, self.cfg), self.cfg, self.lay).signature == s

    def test_two_roots(self):
        cfg = PreambleConfig(839, 30)
        V = cfg.n_shifts
        y = preamble_coefficients(3, cfg) + 0.8 * preamble_coefficients(V + 5, cfg)
        found = {r.signature for r in detect_signatures(y, cfg, self.lay)}
        assert found == {3, V + 5}

    @settings(max_examples=20, deadline=None)
    @given(st.floats(0.01, 100.0), st.floats(-math.pi, math.pi), st.integers(0, 63))
    def test_phase_and_scale_invariant(self, a, phi, s):
        y = delayed_band(s, self.cfg, 40, 24576)
        ref = detect_signature(y, self.cfg, self.lay)
        res = detect_signature(a * np.exp(1j * phi) * y, self.cfg, self.lay)
        assert (res.signature, res.lag) == (ref.signature, ref.lag)

    def test_no_signal(self):
        assert not detect_signature(np.zeros(839), self.cfg, self.lay).detected

    def test_noise_only_false_alarm_rate(self):
        # Noise PDP samples are exponential, so a peak beyond 8x the mean
        # occurs somewhere among 839 lags with probability 1 - (1 - e^-8)^839.
        rng = np.random.default_rng(0)
        n = 400
        hits = sum(
            detect_signature(rng.standard_normal(839) + 1j * rng.standard_normal(839), self.cfg, self.lay).detected
            for _ in range(n)
        )
        p = 1 - (1 - math.exp(-8)) ** 839
        assert abs(hits / n - p) < 4 * math.sqrt(p * (1 - p) / n)

    def test_pdp_shape_and_errors(self):
        assert power_delay_profiles(preamble_coefficients(0, self.cfg), self.cfg).shape == (1, 839)
        with pytest.raises(DimensionError):
            power_delay_profiles(np.ones(10), self.cfg)
        with pytest.raises(ParameterError):
            detect_signature(np.ones(839), self.cfg, self.lay, threshold=0.0)


class TestEstimation:
    n_fft = 1536
    X = preamble_coefficients(0, PreambleConfig(61, 3))
    bins = np.arange(-30, 31)

    def test_noiseless_exact(self):
        h = np.array([0.9, -0.3j, 0.2 + 0.1j])
        y = self.X * (np.exp(-2j * np.pi * np.outer(self.bins, np.arange(3)) / self.n_fft) @ h)
        est = estimate_channel(y, self.X, 3, 0.0, n_fft=self.n_fft, truth=h)
        np.testing.assert_allclose(est.taps, h, atol=1e-10)
        assert est.mse_vs_truth < 1e-20

    def test_square_system_matches_direct_solve(self):
        n = 5
        X = np.exp(1j * np.arange(n))
        bins = np.arange(n) * 300  # well-spread bins keep the system well conditioned
        rng = np.random.default_rng(0)
        y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        est = estimate_channel(y, X, n, 0.0, n_fft=self.n_fft, bins=bins)
        Phi = X[:, None] * np.exp(-2j * np.pi * np.outer(bins, np.arange(n)) / self.n_fft)
        np.testing.assert_allclose(est.taps, np.linalg.solve(Phi, y), atol=1e-10)

    def test_regularization_helps_at_low_snr(self):
        rng = np.random.default_rng(1)
        n_h, nv = 19, 10 ** (-0.5)
        err0 = err1 = 0.0
        tau = tikhonov_weight(nv, n_h)
        for _ in range(200):
            ch = MultipathChannel.random(rng, 3, n_h)
            y = self.X * ch.frequency_response(self.bins, self.n_fft)
            y = y + math.sqrt(nv / 2) * (rng.standard_normal(61) + 1j * rng.standard_normal(61))
            truth = ch.impulse_response()
            small = estimate_channel(y, self.X, n_h, 1e-3, n_fft=self.n_fft, truth=truth)
            reg = estimate_channel(y, self.X, n_h, tau, n_fft=self.n_fft, truth=truth)
            err0 += small.mse_vs_truth
            err1 += reg.mse_vs_truth
        assert err1 < err0

    def test_ill_conditioned_without_regularization(self):
        with pytest.raises(IllConditionedError):
            estimate_channel(self.X, self.X, 19, 0.0, n_fft=self.n_fft)
        with pytest.raises(IllConditionedError):
            estimate_channel(self.X[:5], self.X[:5], 8, 0.0, n_fft=self.n_fft, bins=self.bins[:5])

    def test_response_at_bins(self):
        H = 1 + 0.5 * np.exp(-2j * np.pi * self.bins / self.n_fft)
        est = estimate_channel(self.X * H, self.X, 2, 0.0, n_fft=self.n_fft)
        np.testing.assert_allclose(est.response([100]), 1 + 0.5 * np.exp(-2j * np.pi * 100 / self.n_fft))

    def test_input_checks(self):
        with pytest.raises(DimensionError):
            estimate_channel(np.ones(3), np.ones(4), 2, 0.1, n_fft=64)
        with pytest.raises(ParameterError):
            estimate_channel(np.ones(3), np.ones(3), 2, -0.1, n_fft=64)
        with pytest.raises(ParameterError):
            tikhonov_weight(-1.0, 3)

    def test_noisy_estimate_shrinks(self):
        rng = np.random.default_rng(5)
        y = add_noise(SampledSignal(self.X.copy(), 1.0), 0.1, rng).samples
        est = estimate_channel(y, self.X, 3, 5.0, n_fft=self.n_fft)
        ref = estimate_channel(y, self.X, 3, 0.01, n_fft=self.n_fft)
        assert np.linalg.norm(est.taps) < np.linalg.norm(ref.taps)
