import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bfdm_phy.errors import DimensionError, IllConditionedError, PreconditionError
from bfdm_phy.gabor import (
    GaborSystem,
    Lattice,
    SampledSignal,
    TFOffset,
    _walnut_blocks,
    bessel_bound,
    biorthogonality_residual,
    cp_ofdm_ambiguity,
    cross_ambiguity,
    dual_pulse,
    frame_bounds,
    gram_matrix,
    tf_shift,
)
from bfdm_phy.pulses import b2_sampled, rect_pair


def random_signal(rng, n, ts=1.0, origin=0):
    return SampledSignal(rng.standard_normal(n) + 1j * rng.standard_normal(n), ts, origin)


class TestSampledSignal:
    def test_rejects_empty_and_nonfinite(self):
        with pytest.raises(DimensionError):
            SampledSignal(np.array([]), 1.0)
        with pytest.raises(PreconditionError):
            SampledSignal(np.array([1.0, np.nan]), 1.0)
        with pytest.raises(PreconditionError):
            SampledSignal(np.ones(3), 0.0)

    def test_times_relative_to_origin(self):
        s = SampledSignal(np.ones(5), 0.5, 2)
        np.testing.assert_allclose(s.times, [-1.0, -0.5, 0.0, 0.5, 1.0])

    def test_csv_roundtrip(self, tmp_path):
        s = random_signal(np.random.default_rng(1), 17, ts=2e-6)
        s.to_csv(tmp_path / "s.csv")
        back = SampledSignal.from_csv(tmp_path / "s.csv", 2e-6)
        np.testing.assert_array_equal(back.samples, s.samples)


class TestTfShift:
    def test_identity_is_bit_identical(self):
        g = random_signal(np.random.default_rng(0), 64, origin=10)
        assert np.array_equal(tf_shift(g, TFOffset()).samples, g.samples)

    def test_impulse_delay(self):
        x = np.zeros(64)
        x[0] = 1.0
        out = tf_shift(SampledSignal(x, 1e-6, 0), TFOffset(10e-6, 0.0)).samples
        assert out[10] == 1.0 and np.count_nonzero(out) == 1

    def test_non_integer_shift_rejected(self):
        g = SampledSignal(np.ones(8), 1.0)
        with pytest.raises(PreconditionError):
            tf_shift(g, TFOffset(0.5, 0.0))

    def test_modulation_uses_time_origin(self):
        g = SampledSignal(np.ones(8), 1.0, 3)
        out = tf_shift(g, TFOffset(0.0, 1 / 8))
        assert out.samples[3] == pytest.approx(1.0)
        assert out.samples[4] == pytest.approx(np.exp(2j * np.pi / 8))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(-20, 20), st.integers(-20, 20), st.integers(-5, 5), st.integers(-5, 5))
    def test_composition_up_to_phase(self, s1, s2, k1, k2):
        L = 40
        g = random_signal(np.random.default_rng(3), L, origin=7)
        mu, nu = TFOffset(s1, k1 / L), TFOffset(s2, k2 / L)
        lhs = tf_shift(tf_shift(g, nu), mu).samples
        rhs = tf_shift(g, mu + nu).samples
        # S_mu S_nu = exp(-i 2 pi nu2 mu1) S_{mu+nu}
        np.testing.assert_allclose(lhs, np.exp(-2j * np.pi * nu.nu2 * mu.nu1) * rhs, atol=1e-12)


class TestCrossAmbiguity:
    def test_biorthogonal_pair_at_origin(self):
        p = rect_pair(64, 8, 1.0, 8)
        assert abs(cross_ambiguity(p.rx, p.tx, TFOffset()) - p.gain) < 1e-12
        gam = dual_pulse(p.tx, p.lattice)
        assert abs(cross_ambiguity(gam, p.tx, TFOffset()) - 1.0) < 1e-10

    def test_rect_pair_matches_closed_form(self):
        p = rect_pair(64, 8, 1.0, 3)
        for mu in (TFOffset(0, 0.2 / 64), TFOffset(-5, 0.3 / 64), TFOffset(20, 0.1 / 64), TFOffset(3, 0.0)):
            direct = cross_ambiguity(p.rx, p.tx, mu)
            closed = cp_ofdm_ambiguity(mu, 64.0, 8.0, ts=1.0)
            assert abs(direct - closed) < 1e-10

    def test_grid_mismatch(self):
        with pytest.raises(DimensionError):
            cross_ambiguity(SampledSignal(np.ones(4), 1.0), SampledSignal(np.ones(5), 1.0), TFOffset())


class TestGram:
    def test_orthonormal_family_is_identity(self):
        # Unit-norm rectangle of length M on diag(M, 1/M): an orthonormal basis.
        M, K = 8, 4
        g = np.zeros(M * K)
        g[:M] = 1 / math.sqrt(M)
        sys_ = GaborSystem.full(SampledSignal(g, 1.0, 0), Lattice(M, 1 / M))
        np.testing.assert_allclose(gram_matrix(sys_), np.eye(len(sys_)), atol=1e-12)
        assert bessel_bound(sys_) == pytest.approx(1.0, abs=1e-12)

    def test_cp_transmit_gram_is_dirichlet_toeplitz(self):
        n_u, n_cp = 32, 4
        p = rect_pair(n_u, n_cp, 1.0, 1)
        idx = np.column_stack([np.zeros(n_u, int), np.arange(n_u)])
        G = gram_matrix(GaborSystem(p.tx, p.lattice, idx))
        k = np.arange(n_u)[None, :] - np.arange(n_u)[:, None]
        n = n_u + n_cp
        with np.errstate(invalid="ignore", divide="ignore"):
            mag = np.abs(np.sin(np.pi * k * n / n_u) / np.sin(np.pi * k / n_u)) / n
        mag[k == 0] = 1.0
        np.testing.assert_allclose(np.abs(G), mag, atol=1e-12)
        # Toeplitz: every diagonal is constant in magnitude.
        for d in range(1, 5):
            assert np.ptp(np.abs(np.diagonal(G, d))) < 1e-12

    def test_bessel_receive_rect_is_unity(self):
        p = rect_pair(64, 8, 1.0, 1)
        idx = np.column_stack([np.zeros(64, int), np.arange(64)])
        assert bessel_bound(GaborSystem(p.rx, p.lattice, idx)) == pytest.approx(1.0, abs=1e-8)

    def test_bessel_lanczos_path(self):
        # More than 256 atoms triggers the iterative path; compare with dense.
        rng = np.random.default_rng(5)
        g = random_signal(rng, 320)
        idx = np.column_stack([np.arange(300) % 20, np.arange(300) // 20])
        sys_ = GaborSystem(g, Lattice(16, 1 / 20), idx)
        dense = np.linalg.eigvalsh(gram_matrix(sys_))[-1]
        assert bessel_bound(sys_, tol=1e-12) == pytest.approx(dense, rel=1e-8)


class TestFrameBounds:
    def test_b2_frame_region(self):
        A, B = frame_bounds(b2_sampled(0.05, 1200), Lattice(1.5, 0.5))
        assert A > 0 and B >= A

    def test_b2_not_a_frame(self):
        A, B = frame_bounds(b2_sampled(1 / 30, 1800), Lattice(2.5, 0.3))
        assert A < 1e-6 * B

    def test_tight_frame(self):
        M, K = 8, 4
        g = np.zeros(M * K)
        g[:M] = 1 / math.sqrt(M)
        A, B = frame_bounds(SampledSignal(g, 1.0, 0), Lattice(M, 1 / M))
        assert A == pytest.approx(B) == pytest.approx(1.0)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000), st.integers(1, 12), st.integers(0, 47))
    def test_short_support_shortcut_matches_walnut(self, seed, width, start):
        # Support of at most one hop takes the closed-form route.
        a, M, L = 12, 8, 48
        rng = np.random.default_rng(seed)
        g = np.zeros(L, complex)
        g[(start + np.arange(width)) % L] = rng.standard_normal(width) + 1j * rng.standard_normal(width)
        sig = SampledSignal(g, 1.0, 0)
        lat = Lattice(a, 1 / M)
        A, B = frame_bounds(sig, lat)
        ref = np.linalg.eigvalsh(_walnut_blocks(g, a, M, np.arange(M)))
        assert A == pytest.approx(ref.min(), abs=1e-9 * ref.max())
        assert B == pytest.approx(ref.max(), rel=1e-9)

    def test_frame_operator_eigenvalues(self):
        # Bounds equal the extreme eigenvalues of the explicit frame operator.
        rng = np.random.default_rng(2)
        g = random_signal(rng, 48)
        lat = Lattice(6, 1 / 8)
        atoms = GaborSystem.full(g, lat).atoms()
        S = atoms.T @ atoms.conj()
        ev = np.linalg.eigvalsh(S)
        A, B = frame_bounds(g, lat)
        assert A == pytest.approx(ev.min(), rel=1e-9)
        assert B == pytest.approx(ev.max(), rel=1e-9)


class TestDualPulse:
    def test_orthonormal_is_self_dual(self):
        M, K = 8, 4
        g = np.zeros(M * K)
        g[:M] = 1 / math.sqrt(M)
        sig = SampledSignal(g, 1.0, 0)
        np.testing.assert_allclose(dual_pulse(sig, Lattice(M, 1 / M)).samples, g, atol=1e-12)

    @pytest.mark.parametrize("method", ["block", "cg"])
    def test_cp_transmit_dual(self, method):
        n_u, n_cp = 64, 8
        p = rect_pair(n_u, n_cp, 1.0, 8)
        gam = dual_pulse(p.tx, p.lattice, method=method)
        # Canonical dual: tx divided by the painless frame-operator diagonal,
        # which counts two overlapping shifted copies on two prefix-long zones.
        cover = np.zeros(len(p.tx))
        support = p.tx.samples != 0
        for k in range(len(p.tx) // n_u):
            cover += np.roll(support, k * n_u)
        expect = np.where(support, 1.0 / cover, 0.0)
        expect = expect / np.vdot(p.tx.samples, expect)
        np.testing.assert_allclose(gam.samples, expect, atol=1e-8)
        assert biorthogonality_residual(p.tx, gam, p.lattice) < 1e-10
        # The prefix-discarding rectangle is a different, longer-norm dual.
        assert biorthogonality_residual(p.tx, p.matched_rx(), p.lattice) < 1e-10
        assert gam.norm() < p.matched_rx().norm()

    def test_block_and_cg_agree(self):
        g = SampledSignal(np.exp(-0.5 * ((np.arange(96) - 48) / 6.0) ** 2), 1.0, 48)
        lat = Lattice(12, 1 / 8)
        b = dual_pulse(g, lat, method="block")
        c = dual_pulse(g, lat, method="cg")
        np.testing.assert_allclose(b.samples, c.samples, atol=1e-9)
        assert biorthogonality_residual(g, b, lat) < 1e-10

    def test_direct_inner_products(self):
        g = SampledSignal(np.exp(-0.5 * ((np.arange(96) - 48) / 6.0) ** 2), 1.0, 48)
        lat = Lattice(12, 1 / 8)
        gam = dual_pulse(g, lat)
        atoms_g = GaborSystem.full(g, lat).atoms()
        atoms_d = GaborSystem.full(gam, lat).atoms()
        cross = atoms_d.conj() @ atoms_g.T
        np.testing.assert_allclose(cross, np.eye(cross.shape[0]), atol=1e-10)

    def test_critical_sampling_is_ill_conditioned(self):
        # Triangle at TF = 1 with a zero of its Zak transform.
        g = b2_sampled(0.125, 64)
        with pytest.raises(IllConditionedError) as exc:
            dual_pulse(g, Lattice(1.0, 1.0), max_condition=1e6)
        assert exc.value.condition > 1e6

    def test_unknown_method(self):
        g = SampledSignal(np.ones(16) / 4, 1.0, 0)
        with pytest.raises(PreconditionError):
            dual_pulse(g, Lattice(16, 1 / 16), method="qr")


class TestCpOfdmAmbiguity:
    T_u, T_cp = 1 / 1250, 3168 / 30.72e6

    def test_origin(self):
        eps = self.T_u / (self.T_u + self.T_cp)
        assert cp_ofdm_ambiguity(TFOffset(), self.T_u, self.T_cp) == pytest.approx(math.sqrt(eps), abs=1e-15)

    @pytest.mark.parametrize("frac", [0.1, 0.5, 0.99])
    def test_inside_prefix_is_interference_free(self, frac):
        eps = self.T_u / (self.T_u + self.T_cp)
        v = abs(cp_ofdm_ambiguity(TFOffset(frac * self.T_cp, 0.0), self.T_u, self.T_cp))
        assert v == pytest.approx(math.sqrt(eps), abs=1e-12)

    def test_negative_delay_interferes(self):
        eps = self.T_u / (self.T_u + self.T_cp)
        v = abs(cp_ofdm_ambiguity(TFOffset(-50 / 30.72e6, 0.0), self.T_u, self.T_cp))
        assert v < math.sqrt(eps)

    def test_sampled_form_matches_direct_sum(self):
        p = rect_pair(96, 12, 1.0, 3)
        for s in (-40, -1, 0, 6, 12, 30):
            for f in (0.0, 0.2 / 96, 0.45 / 96):
                mu = TFOffset(float(s), f)
                assert abs(cp_ofdm_ambiguity(mu, 96.0, 12.0, ts=1.0) - cross_ambiguity(p.rx, p.tx, mu)) < 1e-12

    def test_continuous_and_sampled_agree_in_magnitude(self):
        ts = 1 / 30.72e6
        for tau in (-20 * ts, 0.0, 4000 * ts):
            mu = TFOffset(tau, 250.0)
            c = abs(cp_ofdm_ambiguity(mu, 24576 * ts, 3168 * ts))
            d = abs(cp_ofdm_ambiguity(mu, 24576 * ts, 3168 * ts, ts=ts))
            assert c == pytest.approx(d, rel=1e-6)

    def test_rejects_bad_lengths(self):
        with pytest.raises(PreconditionError):
            cp_ofdm_ambiguity(TFOffset(), 0.0, 1.0)
