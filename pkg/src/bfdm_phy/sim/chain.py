"""End-to-end link models used by the Monte Carlo sweeps.

Every signal is normalized to a unit in-band power spectral density, so the
noise variance per sample is ``10^(-snr/10)`` for all waveforms.

Random-access bursts sit in the middle of a receive window of one pulse
length. The user of interest sends one burst and is silent otherwise. The
second user sends a continuous stream of independent bursts with the same
period; its delay and frequency offset act in continuous time on that
stream, so no circular wrap enters the interference.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from ..channel import MultipathChannel, add_noise, apply_multipath
from ..gabor import Lattice, SampledSignal
from ..phy.detection import detect_signature
from ..phy.estimation import estimate_channel, tikhonov_weight
from ..phy.modem import (
    FrameLayout,
    bfdm_demodulate,
    bfdm_modulate,
    calibrate_beta,
    ofdm_prach_demodulate,
    ofdm_prach_modulate,
)
from ..phy.preamble import PreambleConfig, preamble_coefficients
from ..phy.pusch import PuschConfig, pusch_demodulate, pusch_modulate
from ..phy.qam import hard_decision, random_symbols
from ..pulses import spline_pair
from .config import ScenarioConfig

__all__ = ["PrachModem", "cached_spline_pair", "noise_var_for", "prach_bins", "pusch_config", "prach_trial", "pusch_trial", "TrialCounts", "trial_rng"]


def noise_var_for(snr_db: float) -> float:
    return 0.0 if math.isinf(snr_db) and snr_db > 0 else 10 ** (-snr_db / 10)


def prach_bins(cfg: ScenarioConfig, guard_band: int = 0, n_dprach: int | None = None):
    """Signed bins ``(preamble, user-of-interest data, second-user data)``.

    Data subcarriers sit next to the preamble block on both sides. The inner
    half on each side belongs to the user of interest; the outer half,
    pushed out by ``guard_band`` empty subcarriers, to the second user. With
    ``n_dprach`` given, all that many subcarriers go to the first user.
    """
    h = (cfg.n_zc - 1) // 2
    pre = np.arange(-h, h + 1)
    if n_dprach is not None:
        side = np.arange(1, n_dprach // 2 + 1)
        return pre, np.concatenate([-(h + side[::-1]), h + side]), np.array([], dtype=int)
    q = cfg.data_per_side // 2
    inner = np.arange(1, q + 1)
    outer = np.arange(q + guard_band + 1, 2 * q + guard_band + 1)
    u1 = np.concatenate([-(h + inner[::-1]), h + inner])
    u2 = np.concatenate([-(h + outer[::-1]), h + outer])
    return pre, u1, u2


@functools.lru_cache(maxsize=16)
def cached_spline_pair(alpha, t_step, f_step, ts, frame_len):
    """Spline pulse pair, memoized on its defining parameters."""
    return spline_pair(alpha, Lattice(t_step, f_step), ts, frame_len)


class PrachModem:
    """Waveform-specific random-access modulator and demodulator."""

    def __init__(self, cfg: ScenarioConfig, waveform: str, preamble_bins, data_bins):
        self.cfg = cfg
        self.waveform = waveform
        n = cfg.prach_symbol_len
        if waveform == "bfdm-spline":
            self.pair = cached_spline_pair(
                cfg.alpha, n * cfg.ts, 1.0 / (cfg.prach_fft * cfg.ts), cfg.ts, cfg.pulse_len
            )
            p = cfg.pulse_len
            self.rx_energy = self.pair.rx.norm() ** 2
        elif waveform == "cp-ofdm":
            self.pair = None
            p = cfg.prach_cp + cfg.prach_fft
            self.rx_energy = (cfg.prach_fft + cfg.prach_cp) / cfg.prach_fft
        else:
            raise ValueError(f"unknown waveform {waveform!r}")
        L = cfg.prach_frame_len
        k = cfg.prach_symbols
        # Center the burst: pulse origins for shaped symbols, prefix start otherwise.
        offset = (L - (k - 1) * n) // 2 if self.pair is not None else (L - k * n) // 2
        kw = dict(ts=cfg.ts, n_frame=L, offset=offset)
        probe = FrameLayout(cfg.prach_fft, n, k, p, preamble_bins, data_bins, **kw)
        self.layout = FrameLayout(cfg.prach_fft, n, k, p, preamble_bins, data_bins,
                                  beta=calibrate_beta(probe), **kw)

    def modulate(self, grid) -> SampledSignal:
        if self.pair is not None:
            return bfdm_modulate(grid, self.pair.tx, self.layout)
        return ofdm_prach_modulate(grid, self.layout, self.cfg.prach_cp)

    def demodulate(self, r: SampledSignal) -> np.ndarray:
        if self.pair is not None:
            return bfdm_demodulate(r, self.pair.rx, self.layout)
        return ofdm_prach_demodulate(r, self.layout, self.cfg.prach_cp)

    def coefficient_noise_var(self, noise_var: float) -> float:
        """Noise variance of one demodulated coefficient."""
        return noise_var * self.rx_energy / self.layout.beta**2


@dataclass
class TrialCounts:
    errors: int = 0
    errors_incl_detection: int = 0
    symbols: int = 0
    detected: int = 0
    frames: int = 0

    def add(self, other: "TrialCounts") -> None:
        self.errors += other.errors
        self.errors_incl_detection += other.errors_incl_detection
        self.symbols += other.symbols
        self.detected += other.detected
        self.frames += other.frames


def trial_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent substream for one Monte Carlo task."""
    return np.random.default_rng(np.random.SeedSequence([seed, *keys]))


def interferer_stream(
    modem: PrachModem,
    bins,
    rng: np.random.Generator,
    ch: MultipathChannel,
    offset_samples: int,
    cfo_hz: float,
) -> np.ndarray:
    """Receive-window samples of a user sending back-to-back independent bursts.

    Three consecutive frames are modulated, passed through the channel with a
    linear convolution and frequency shifted with a continuous phase ramp.
    The window starts ``offset_samples`` before the middle frame, so a
    positive offset delays the interferer.
    """
    cfg = modem.cfg
    lay = modem.layout
    L = lay.frame_len
    if abs(offset_samples) >= L:
        raise ValueError("offset must be shorter than one frame")
    frames = []
    for _ in range(3):
        _, x = random_symbols(rng, (lay.k, len(bins)), cfg.modulation)
        frames.append(modem.modulate(lay.grid(data=x, data_bins=bins)).samples)
    stream = SampledSignal(np.concatenate(frames), cfg.ts, 0)
    stream = apply_multipath(stream, ch, "linear").samples
    if cfo_hz:
        stream = stream * np.exp(2j * np.pi * cfo_hz * cfg.ts * np.arange(stream.size))
    start = L - offset_samples
    return stream[start : start + L]


def prach_trial(
    modem: PrachModem,
    pcfg: PreambleConfig,
    u1_bins,
    u2_bins,
    rng: np.random.Generator,
    snr_db: float,
    offset_samples: int = 0,
    cfo_hz: float = 0.0,
    perfect_csi: bool = False,
) -> TrialCounts:
    """One frame with the user of interest and an optional second user.

    Random draws happen in a fixed order and do not depend on the waveform,
    so two waveforms run with equal seeds see identical data, channels and
    noise.
    """
    cfg = modem.cfg
    lay = modem.layout
    k = lay.k
    sig = int(rng.integers(pcfg.n_signatures))
    idx1, x1 = random_symbols(rng, (k, len(u1_bins)), cfg.modulation)
    h1 = MultipathChannel.random(rng, cfg.n_taps, cfg.prach_channel_len)
    h2 = MultipathChannel.random(rng, cfg.n_taps, cfg.prach_channel_len)
    X = preamble_coefficients(sig, pcfg)
    s1 = modem.modulate(lay.grid(preamble=X, data=x1, data_bins=u1_bins))
    r = apply_multipath(s1, h1, "linear").samples
    if len(u2_bins):
        r = r + interferer_stream(modem, u2_bins, rng, h2, offset_samples, cfo_hz)
    nv = noise_var_for(snr_db)
    r = add_noise(s1.with_samples(r), nv, rng)
    Y = modem.demodulate(r)
    y_pre = Y[:, lay.preamble_bins % lay.n_fft].mean(axis=0)
    det = detect_signature(y_pre, pcfg, lay, cfg.detection_threshold)
    if perfect_csi:
        H = h1.frequency_response(u1_bins, lay.n_fft)
    else:
        cvar = modem.coefficient_noise_var(nv) / k
        tau = cfg.tikhonov_tau if cfg.tikhonov_tau is not None else tikhonov_weight(cvar, cfg.prach_channel_len)
        est = estimate_channel(y_pre, X, cfg.prach_channel_len, max(tau, 1e-9),
                               n_fft=lay.n_fft, bins=lay.preamble_bins)
        H = est.response(u1_bins)
    xh = Y[:, np.asarray(u1_bins) % lay.n_fft] / H[None, :]
    err = int(np.count_nonzero(hard_decision(xh, cfg.modulation) != idx1))
    ok = det.signature == sig
    n_sym = idx1.size
    return TrialCounts(err, err if ok else n_sym, n_sym, int(ok), 1)


def pusch_config(cfg: ScenarioConfig) -> PuschConfig:
    """Two DFT-spreading clusters on either side of the reserved access region."""
    half = cfg.pusch_subcarriers // 2
    R = cfg.prach_region_half
    lower = np.arange(-R - half, -R)
    upper = np.arange(R + 1, R + half + 1)
    bins = np.concatenate([lower, upper])
    return PuschConfig(
        cfg.pusch_fft,
        bins,
        (np.arange(half), np.arange(half, 2 * half)),
        cfg.pusch_cp_first,
        cfg.pusch_cp_other,
        symbols_per_slot=7,
        n_slots=2 * cfg.pusch_frame_len_ms,
        ts=cfg.ts,
    )


def pusch_trial(
    modem: PrachModem,
    pcfg: PreambleConfig,
    ucfg: PuschConfig,
    dprach_bins,
    rng: np.random.Generator,
    dft_spread: bool,
) -> TrialCounts:
    """One frame of uplink data with a co-scheduled random-access user.

    Each DFT-spreading cluster has its own multipath channel and is
    equalized with perfect channel knowledge.
    """
    cfg = modem.cfg
    lay = modem.layout
    # Data-channel draws come first so they are shared by every waveform
    # and every random-access allocation at the same trial index.
    idx, x = random_symbols(rng, (ucfg.n_symbols, ucfg.n_subcarriers), "4qam")
    chans = [MultipathChannel.random(rng, cfg.n_taps, cfg.pusch_channel_len) for _ in ucfg.clusters]
    nv = noise_var_for(cfg.pusch_snr_db)
    noise = add_noise(SampledSignal(np.zeros(ucfg.frame_len, dtype=complex), cfg.ts, 0), nv, rng).samples
    sig = int(rng.integers(pcfg.n_signatures))
    hp = MultipathChannel.random(rng, cfg.n_taps, cfg.prach_channel_len)
    r = noise.copy()
    H = np.empty(ucfg.n_subcarriers, dtype=complex)
    for c, ch in zip(ucfg.clusters, chans):
        xc = np.zeros_like(x)
        xc[:, c] = x[:, c]
        s = pusch_modulate(xc, ucfg, dft_spread)
        r += apply_multipath(s, ch, "circular").samples
        H[c] = ch.frequency_response(ucfg.bins[c], ucfg.n_fft)
    xd = None
    if len(dprach_bins):
        _, xd = random_symbols(rng, (lay.k, len(dprach_bins)), cfg.modulation)
    grid = lay.grid(preamble=preamble_coefficients(sig, pcfg), data=xd,
                    data_bins=dprach_bins if len(dprach_bins) else None)
    r += apply_multipath(modem.modulate(grid), hp, "linear").samples
    rx = SampledSignal(r, cfg.ts, 0)
    xh = pusch_demodulate(rx, ucfg, dft_spread, H, nv)
    err = int(np.count_nonzero(hard_decision(xh, "4qam") != idx))
    return TrialCounts(err, err, idx.size, 1, 1)
