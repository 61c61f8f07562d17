import numpy as np
import pytest

from bfdm_phy.channel import (
    LinkImpairments,
    MultipathChannel,
    add_noise,
    apply_awgn,
    apply_multipath,
    apply_offset,
    noise_variance,
)
from bfdm_phy.errors import ParameterError, PreconditionError
from bfdm_phy.gabor import SampledSignal


def tone(n=1024, k=5, ts=1.0):
    return SampledSignal(np.exp(2j * np.pi * k * np.arange(n) / n), ts, 0)


class TestMultipath:
    def test_unit_tap_at_zero_is_identity(self):
        s = tone()
        out = apply_multipath(s, MultipathChannel([0], [1.0], 4))
        np.testing.assert_array_equal(out.samples, s.samples)

    def test_pure_delay_gives_phase_ramp(self):
        n, d = 256, 7
        x = np.random.default_rng(0).standard_normal(n) + 0j
        s = SampledSignal(x, 1.0, 0)
        y = apply_multipath(s, MultipathChannel([d], [1.0], 16), "circular").samples
        X, Y = np.fft.fft(x), np.fft.fft(y)
        ramp = np.exp(-2j * np.pi * np.arange(n) * d / n)
        np.testing.assert_allclose(Y, X * ramp, atol=1e-10)

    def test_linear_truncates(self):
        s = SampledSignal(np.ones(8), 1.0, 0)
        y = apply_multipath(s, MultipathChannel([3], [1.0], 4), "linear").samples
        np.testing.assert_array_equal(y, [0, 0, 0, 1, 1, 1, 1, 1])

    def test_energy_scales_with_taps(self):
        rng = np.random.default_rng(1)
        n = 200_000
        x = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)
        ch = MultipathChannel.random(rng, 3, 300)
        y = apply_multipath(SampledSignal(x, 1.0, 0), ch).samples
        expect = np.sum(np.abs(ch.gains) ** 2) * np.sum(np.abs(x) ** 2)
        assert np.sum(np.abs(y) ** 2) == pytest.approx(expect, rel=0.02)

    def test_random_channel_invariants(self):
        rng = np.random.default_rng(2)
        powers = []
        for _ in range(2000):
            ch = MultipathChannel.random(rng, 3, 300)
            assert ch.delays.size == 3 and np.all(ch.delays < 300)
            assert np.unique(ch.delays).size == 3
            powers.append(np.sum(np.abs(ch.gains) ** 2))
        assert np.mean(powers) == pytest.approx(1.0, rel=0.05)

    def test_frequency_response_matches_fft(self):
        ch = MultipathChannel([0, 3, 9], [1.0, 0.5j, -0.25], 16)
        n_fft = 64
        H = np.fft.fft(ch.impulse_response(), n_fft)
        bins = np.arange(-10, 10)
        np.testing.assert_allclose(ch.frequency_response(bins, n_fft), H[bins % n_fft], atol=1e-12)

    def test_invalid_channels(self):
        with pytest.raises(PreconditionError):
            MultipathChannel([5], [1.0], 5)
        with pytest.raises(PreconditionError):
            MultipathChannel([1, 1], [1.0, 1.0], 5)
        with pytest.raises(PreconditionError):
            apply_multipath(tone(), MultipathChannel([0], [1.0], 2), "cyclic")

    def test_csv_roundtrip(self, tmp_path):
        ch = MultipathChannel([0, 4], [0.3 + 0.1j, -0.2j], 10)
        ch.to_csv(tmp_path / "h.csv")
        back = MultipathChannel.from_csv(tmp_path / "h.csv", 10)
        np.testing.assert_array_equal(back.delays, ch.delays)
        np.testing.assert_array_equal(back.gains, ch.gains)


class TestOffset:
    def test_zero_is_identity(self):
        s = tone()
        np.testing.assert_array_equal(apply_offset(s, LinkImpairments()).samples, s.samples)

    def test_cfo_moves_tone_a_twentieth_of_a_bin(self):
        ts = 1 / 30.72e6
        n = 24576
        s = SampledSignal(np.exp(2j * np.pi * 10 * np.arange(n) / n), ts, 0)
        y = apply_offset(s, LinkImpairments(freq_offset=62.5)).samples
        # Spacing 1250 Hz: the tone now sits at bin 10.05.
        freq = np.angle(np.vdot(y[:-1], y[1:])) / (2 * np.pi) * n
        assert freq == pytest.approx(10.05, abs=1e-9)
        assert 62.5 * n * ts == pytest.approx(0.05)

    def test_signed_time_offset_is_circular(self):
        x = np.zeros(16)
        x[2] = 1.0
        s = SampledSignal(x, 1.0, 0)
        assert np.argmax(np.abs(apply_offset(s, LinkImpairments(time_offset=-3.0)).samples)) == 15
        assert np.argmax(np.abs(apply_offset(s, LinkImpairments(time_offset=3.0)).samples)) == 5

    def test_non_integral_shift(self):
        with pytest.raises(PreconditionError):
            apply_offset(tone(), LinkImpairments(time_offset=0.5))

    def test_non_finite(self):
        with pytest.raises(ParameterError):
            apply_offset(tone(), LinkImpairments(freq_offset=float("nan")))


class TestNoise:
    def test_noise_variance_formula(self):
        s = SampledSignal(2 * np.ones(10), 1.0, 0)
        assert noise_variance(s, 10.0) == pytest.approx(0.4)
        assert noise_variance(s, 10.0, occupied_fraction=0.5) == pytest.approx(0.8)
        assert noise_variance(s, float("inf")) == 0.0

    def test_empirical_snr(self):
        rng = np.random.default_rng(4)
        s = tone(100_000)
        y = apply_awgn(s, 20.0, rng)
        n = y.samples - s.samples
        assert np.mean(np.abs(n) ** 2) == pytest.approx(0.01, rel=0.03)
        # Circular: real and imaginary parts carry half each.
        assert np.var(n.real) == pytest.approx(np.var(n.imag), rel=0.05)

    def test_infinite_snr_is_identity(self):
        s = tone()
        assert apply_awgn(s, float("inf"), np.random.default_rng(0)) is s

    def test_zero_power_reference(self):
        with pytest.raises(ParameterError):
            apply_awgn(SampledSignal(np.zeros(4), 1.0), 10.0, np.random.default_rng(0))

    def test_reproducible(self):
        s = tone()
        a = add_noise(s, 0.1, np.random.default_rng(9)).samples
        b = add_noise(s, 0.1, np.random.default_rng(9)).samples
        np.testing.assert_array_equal(a, b)

    def test_negative_variance(self):
        with pytest.raises(ParameterError):
            add_noise(tone(), -1.0, np.random.default_rng(0))
