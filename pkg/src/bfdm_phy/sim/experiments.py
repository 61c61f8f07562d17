"""Experiment orchestration: sweeps that turn a scenario into result rows.

Every Monte Carlo task draws from ``SeedSequence([seed, experiment, trial])``.
The keys do not depend on the waveform or the sweep point, so all curves of
one experiment share data, channels and noise (common random numbers), and
a run is fully determined by the configuration and its seed.
"""

from __future__ import annotations

import dataclasses
import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..channel import MultipathChannel, add_noise, apply_multipath
from ..gabor import Lattice, SampledSignal, TFOffset, biorthogonality_residual, frame_bounds
from ..interference import (
    OffsetMap,
    bound_deterministic,
    general_ambiguity_lb,
    pair_ambiguity,
    simulate_ici,
    spline_ambiguity_freq_lb,
    spline_ambiguity_time_lb,
)
from ..phy.detection import detect_signature
from ..phy.estimation import estimate_channel, tikhonov_weight
from ..phy.preamble import PreambleConfig, preamble_coefficients
from ..phy.pusch import pusch_modulate
from ..phy.qam import random_symbols
from ..pulses import PulsePair, bessel_vs_alpha, rect_pair
from .chain import (
    PrachModem,
    TrialCounts,
    cached_spline_pair,
    noise_var_for,
    prach_bins,
    prach_trial,
    pusch_config,
    pusch_trial,
    trial_rng,
)
from .config import ScenarioConfig
from .psd import band_mean_db, compute_psd
from .results import ResultRow

__all__ = [
    "THREADS_ENV",
    "run_scenario",
    "sweep_ser_vs_offset",
    "sweep_ser_vs_snr",
    "sweep_pusch_ser_vs_dprach",
    "sweep_ici",
    "sweep_bounds",
    "pulse_report",
    "psd_report",
    "detection_report",
    "chanest_report",
    "detect_from_samples",
    "chanest_from_samples",
    "prach_lattice",
    "prach_pair",
]

THREADS_ENV = "BFDM_PHY_THREADS"

# Stable integer keys for the random substreams of each experiment.
_EXP_KEYS = {"ser-offset": 1, "ser-snr": 2, "pusch": 3, "psd": 4, "detect": 5, "chanest": 6}


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _ordered_map(fn, items) -> list:
    """Map ``fn`` over ``items`` on a thread pool, keeping input order."""
    items = list(items)
    n = _threads()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def prach_lattice(cfg: ScenarioConfig) -> Lattice:
    """Random-access lattice ``diag(T, F)`` with ``TF`` from the config."""
    return Lattice(cfg.prach_symbol_len * cfg.ts, 1.0 / (cfg.prach_fft * cfg.ts))


def prach_pair(cfg: ScenarioConfig, waveform: str, alpha: float | None = None) -> PulsePair:
    """Transmit/receive pulse pair of a random-access waveform."""
    if waveform == "cp-ofdm":
        return rect_pair(cfg.prach_fft * cfg.ts, cfg.prach_cp * cfg.ts, cfg.ts)
    if waveform == "bfdm-spline":
        lat = prach_lattice(cfg)
        a = cfg.alpha if alpha is None else alpha
        return cached_spline_pair(a, lat.t_step, lat.f_step, cfg.ts, cfg.pulse_len)
    raise ValueError(f"unknown waveform {waveform!r}")


def _rate_rows(exp, waveform, sweep, counts: TrialCounts, cfg) -> list[ResultRow]:
    base = dict(experiment=exp, waveform=waveform, sweep=sweep, trials=cfg.trials, seed=cfg.seed)
    sym = max(counts.symbols, 1)
    frames = max(counts.frames, 1)
    return [
        ResultRow(metric="ser", value=counts.errors / sym, n_events=counts.errors, n_total=counts.symbols, **base),
        ResultRow(
            metric="ser_incl_detection",
            value=counts.errors_incl_detection / sym,
            n_events=counts.errors_incl_detection,
            n_total=counts.symbols,
            **base,
        ),
        ResultRow(
            metric="detection_rate",
            value=counts.detected / frames,
            n_events=counts.detected,
            n_total=counts.frames,
            **base,
        ),
    ]


def _samples(us: float, cfg: ScenarioConfig) -> int:
    return int(round(us * 1e-6 * cfg.fs))


# Random access SER sweeps ---------------------------------------------------


def sweep_ser_vs_offset(cfg: ScenarioConfig, offsets=None, cfos=None) -> list[ResultRow]:
    """Symbol error rate of the user of interest vs. the second user's delay.

    Runs once without frequency offset and, if ``second_user_cfo_hz`` is
    nonzero, once more with it.
    """
    offsets = list(cfg.second_user_offsets_us if offsets is None else offsets)
    if cfos is None:
        cfos = [0.0] + ([cfg.second_user_cfo_hz] if cfg.second_user_cfo_hz else [])
    pcfg = PreambleConfig(cfg.n_zc, cfg.n_cs, cfg.n_cf)
    pre, u1, u2 = prach_bins(cfg, 0)
    snr = cfg.snr_db[0]
    modems = {w: PrachModem(cfg, w, pre, np.concatenate([u1, u2])) for w in cfg.waveforms}
    points = [(cfo, off, w) for cfo in cfos for off in offsets for w in cfg.waveforms]

    def run(point):
        cfo, off, w = point
        c = TrialCounts()
        for tr in range(cfg.trials):
            rng = trial_rng(cfg.seed, _EXP_KEYS["ser-offset"], tr)
            c.add(prach_trial(modems[w], pcfg, u1, u2, rng, snr, _samples(off, cfg), cfo, cfg.perfect_csi))
        return _rate_rows("ser-offset", w, {"offset_us": float(off), "cfo_hz": float(cfo), "snr_db": float(snr)}, c, cfg)

    return [r for rows in _ordered_map(run, points) for r in rows]


def sweep_ser_vs_snr(cfg: ScenarioConfig, snrs=None, guard_bands=None) -> list[ResultRow]:
    """Symbol error rate vs. SNR per guard band, second user at ``fixed_offset_us``."""
    snrs = list(cfg.snr_db if snrs is None else snrs)
    gbs = list(cfg.guard_bands if guard_bands is None else guard_bands)
    pcfg = PreambleConfig(cfg.n_zc, cfg.n_cs, cfg.n_cf)
    off = _samples(cfg.fixed_offset_us, cfg)
    setups = {}
    for gb in gbs:
        pre, u1, u2 = prach_bins(cfg, gb)
        for w in cfg.waveforms:
            setups[(gb, w)] = (PrachModem(cfg, w, pre, np.concatenate([u1, u2])), u1, u2)
    points = [(gb, snr, w) for gb in gbs for snr in snrs for w in cfg.waveforms]

    def run(point):
        gb, snr, w = point
        modem, u1, u2 = setups[(gb, w)]
        c = TrialCounts()
        for tr in range(cfg.trials):
            rng = trial_rng(cfg.seed, _EXP_KEYS["ser-snr"], tr)
            c.add(prach_trial(modem, pcfg, u1, u2, rng, float(snr), off, cfg.second_user_cfo_hz, cfg.perfect_csi))
        sweep = {"guard_band": gb, "snr_db": float(snr), "offset_us": float(cfg.fixed_offset_us)}
        return _rate_rows("ser-snr", w, sweep, c, cfg)

    return [r for rows in _ordered_map(run, points) for r in rows]


def sweep_pusch_ser_vs_dprach(cfg: ScenarioConfig, counts=None) -> list[ResultRow]:
    """Data channel SER vs. the number of data subcarriers in the access band."""
    counts = list(cfg.dprach_counts if counts is None else counts)
    pcfg = PreambleConfig(cfg.n_zc, cfg.n_cs, cfg.n_cf)
    ucfg = pusch_config(cfg)
    points = [(ds, n, w) for ds in cfg.dft_spread for n in counts for w in cfg.waveforms]

    def run(point):
        ds, n, w = point
        pre, u1, _ = prach_bins(cfg, 0, n)
        modem = PrachModem(cfg, w, pre, u1)
        c = TrialCounts()
        for tr in range(cfg.trials):
            rng = trial_rng(cfg.seed, _EXP_KEYS["pusch"], tr)
            c.add(pusch_trial(modem, pcfg, ucfg, u1, rng, bool(ds)))
        sweep = {"n_dprach": n, "dft_spread": bool(ds), "snr_db": float(cfg.pusch_snr_db)}
        return [
            ResultRow("pusch", w, sweep, "pusch_ser", c.errors / max(c.symbols, 1), cfg.trials, cfg.seed,
                      n_events=c.errors, n_total=c.symbols)
        ]

    return [r for rows in _ordered_map(run, points) for r in rows]


# Interference analysis ------------------------------------------------------


def _ici_points(cfg: ScenarioConfig):
    F = 1.0 / (cfg.prach_fft * cfg.ts)
    pts = [(0.0, fo * F, {"time_offset_us": 0.0, "freq_offset": float(fo)}) for fo in cfg.ici_freq_offsets]
    pts += [
        (_samples(t, cfg) * cfg.ts, 0.0, {"time_offset_us": float(t), "freq_offset": 0.0})
        for t in cfg.ici_time_offsets_us
    ]
    return pts


def sweep_ici(cfg: ScenarioConfig) -> list[ResultRow]:
    """Simulated mean ICI power and its bound vs. time and frequency offsets."""
    rows = []
    n = cfg.ici_subcarriers
    for w in cfg.waveforms:
        pair = prach_pair(cfg, w)
        for dt, df, sweep in _ici_points(cfg):
            rep = simulate_ici(pair, OffsetMap.single(TFOffset(dt, df), n), n)
            for metric, v in (("ici_sim", rep.mean_ici_power), ("ici_bound", rep.bound_value)):
                rows.append(ResultRow("ici", w, sweep, metric, float(v), cfg.trials, cfg.seed))
    return rows


def sweep_bounds(cfg: ScenarioConfig) -> list[ResultRow]:
    """Closed-form ICI bounds and the spline ambiguity lower bounds."""
    rows = []
    n = cfg.ici_subcarriers
    for w in cfg.waveforms:
        pair = prach_pair(cfg, w)
        for dt, df, sweep in _ici_points(cfg):
            b = bound_deterministic(pair, pair.energy, pair.bessel, OffsetMap.single(TFOffset(dt, df), n), n)
            rows.append(ResultRow("bound", w, sweep, "ici_bound", float(b), cfg.trials, cfg.seed))
    if "bfdm-spline" in cfg.waveforms:
        rows += _spline_lower_bounds(cfg)
    return rows


def _spline_lower_bounds(cfg: ScenarioConfig, n_time: int = 11, n_freq: int = 7) -> list[ResultRow]:
    pair = prach_pair(cfg, "bfdm-spline")
    T, F = pair.lattice.t_step, pair.lattice.f_step
    nt = cfg.prach_symbol_len
    shifts = sorted({int(round(x)) for x in np.linspace(0, 0.1 * nt, n_time)})
    freqs = np.linspace(0.0, 0.3, n_freq)
    rows = []
    for s in shifts:
        for fo in freqs:
            mu = TFOffset(s * cfg.ts, fo * F)
            sweep = {"time_offset_us": s * cfg.ts * 1e6, "freq_offset": float(fo)}
            vals = [("ambiguity_abs", abs(pair_ambiguity(pair, mu))), ("lb_general", general_ambiguity_lb(pair, mu))]
            if s == 0:
                vals.append(("lb_freq", spline_ambiguity_freq_lb(fo * F, cfg.alpha, T)))
            if fo == 0:
                vals.append(("lb_time", spline_ambiguity_time_lb(s * cfg.ts, cfg.alpha, T)))
            rows += [ResultRow("bound", "bfdm-spline", sweep, m, float(v), cfg.trials, cfg.seed) for m, v in vals]
    return rows


# Pulse design ---------------------------------------------------------------


def pulse_report(cfg: ScenarioConfig) -> list[ResultRow]:
    """Bessel bound vs. dilation, pulse diagnostics and the selected pulse samples."""
    lat = prach_lattice(cfg)
    rows = []
    for a, B in bessel_vs_alpha(cfg.alphas, lat, cfg.ts, cfg.pulse_len):
        rows.append(ResultRow("pulse", "bfdm-spline", {"alpha": a}, "bessel_bound", float(B), cfg.trials, cfg.seed))
    for w in cfg.waveforms:
        pair = prach_pair(cfg, w)
        sw = {"alpha": float(cfg.alpha)} if w == "bfdm-spline" else {}
        A_tx, B_tx = frame_bounds(pair.tx, pair.lattice)
        _, B_rx = frame_bounds(pair.rx, pair.lattice)
        T, F = pair.lattice.t_step, pair.lattice.f_step
        vals = [
            ("tx_energy", pair.tx.norm() ** 2),
            ("rx_energy", pair.rx.norm() ** 2),
            ("tx_lower_frame_bound", A_tx),
            ("tx_bessel_bound", B_tx),
            ("rx_bessel_bound", B_rx),
            ("ambiguity_abs_T0", abs(pair_ambiguity(pair, TFOffset(T, 0.0)))),
            ("ambiguity_abs_0F", abs(pair_ambiguity(pair, TFOffset(0.0, F)))),
        ]
        if w == "bfdm-spline":
            vals.append(("biorthogonality_residual", biorthogonality_residual(pair.tx, pair.rx, pair.lattice)))
        rows += [ResultRow("pulse", w, sw, m, float(v), cfg.trials, cfg.seed) for m, v in vals]
        p = pair.tx if cfg.pulse_kind == "tx" else pair.rx
        idx = np.arange(len(p)) - p.origin_index
        metric = f"{cfg.pulse_kind}_pulse"
        rows += [
            ResultRow("pulse", w, {**sw, "index": int(i)}, metric, float(v.real), cfg.trials, cfg.seed)
            for i, v in zip(idx, p.samples)
        ]
    return rows


# Spectrum -------------------------------------------------------------------


def _full_occupancy(cfg: ScenarioConfig) -> ScenarioConfig:
    return dataclasses.replace(cfg, prach_symbols=cfg.prach_frame_len // cfg.prach_symbol_len)


def psd_report(cfg: ScenarioConfig) -> list[ResultRow]:
    """Welch PSD of the data channel and of both random-access waveforms.

    The random-access signals fill every symbol period of the frame with
    preamble and data subcarriers, which is the load the power calibration
    refers to. Each period carries an independently drawn signature. ``trials`` frames are averaged per signal.
    """
    if cfg.trials == 0:
        return []
    ucfg = pusch_config(cfg)
    full = _full_occupancy(cfg)
    pcfg = PreambleConfig(cfg.n_zc, cfg.n_cs, cfg.n_cf)
    pre, u1, u2 = prach_bins(cfg, 0)
    data = np.concatenate([u1, u2])
    modems = {w: PrachModem(full, w, pre, data) for w in cfg.waveforms}
    psds = {}
    for tr in range(cfg.trials):
        rng = trial_rng(cfg.seed, _EXP_KEYS["psd"], tr)
        _, x = random_symbols(rng, (ucfg.n_symbols, ucfg.n_subcarriers), "4qam")
        _, xd = random_symbols(rng, (full.prach_symbols, data.size), cfg.modulation)
        sigs = rng.integers(pcfg.n_signatures, size=full.prach_symbols)
        signals = {"pusch": pusch_modulate(x, ucfg, bool(cfg.dft_spread[0]))}
        for w, m in modems.items():
            grid = m.layout.grid(data=xd, data_bins=data)
            for k, sg in enumerate(sigs):
                grid[k, pre % m.layout.n_fft] = preamble_coefficients(int(sg), pcfg)
            signals[w] = m.modulate(grid)
        for name, s in signals.items():
            f, p = compute_psd(s, cfg.welch_nfft, cfg.welch_overlap)
            psds[name] = psds.get(name, 0.0) + 10 ** (p / 10) / cfg.trials
    rows = []
    for name, p in psds.items():
        pdb = 10 * np.log10(np.maximum(p, 1e-300))
        rows += [
            ResultRow("psd", name, {"freq_hz": float(fi)}, "psd_db", float(v), cfg.trials, cfg.seed)
            for fi, v in zip(f, pdb)
        ]
    F_pu = 1.0 / (cfg.pusch_fft * cfg.ts)
    F_pr = 1.0 / (cfg.prach_fft * cfg.ts)
    half = cfg.pusch_subcarriers // 2
    R = cfg.prach_region_half
    # Interior of each occupied band, clear of the band-edge roll-off.
    pu_lo, pu_hi = (R + 1 + 0.2 * half) * F_pu, (R + 0.8 * half) * F_pu
    pr_edge = 0.8 * (cfg.n_zc - 1) / 2 * F_pr
    pu = 10 * np.log10(np.maximum(psds["pusch"], 1e-300))
    ref = band_mean_db(np.abs(f), pu, pu_lo, pu_hi)
    rows.append(ResultRow("psd", "pusch", {}, "inband_psd_db", ref, cfg.trials, cfg.seed))
    for w in cfg.waveforms:
        v = band_mean_db(f, 10 * np.log10(np.maximum(psds[w], 1e-300)), -pr_edge, pr_edge)
        rows.append(ResultRow("psd", w, {}, "inband_psd_db", v, cfg.trials, cfg.seed))
        rows.append(ResultRow("psd", w, {}, "inband_gap_db", v - ref, cfg.trials, cfg.seed))
    return rows


# Detection and channel estimation -------------------------------------------


def _preamble_rx(modem: PrachModem, pcfg, sig, rng, ch, delay, nv) -> np.ndarray:
    lay = modem.layout
    s = modem.modulate(lay.grid(preamble=preamble_coefficients(sig, pcfg)))
    r = s.samples
    if ch is not None:
        r = apply_multipath(s, ch, "linear").samples
    if delay:
        r = np.concatenate([np.zeros(delay, dtype=complex), r[: r.size - delay]])
    r = add_noise(s.with_samples(r), nv, rng) if rng is not None else s.with_samples(r)
    Y = modem.demodulate(r)
    return Y[:, lay.preamble_bins % lay.n_fft].mean(axis=0)


def detection_report(cfg: ScenarioConfig) -> list[ResultRow]:
    """Noiseless detection of every signature, then random trials under multipath."""
    pcfg = PreambleConfig(cfg.n_zc, cfg.n_cs, cfg.n_cf)
    pre, _, _ = prach_bins(cfg, 0)
    bin_s = cfg.prach_fft / cfg.n_zc * cfg.ts
    # Delays up to n_cs - 1 bins stay clear of the neighbouring cyclic shift.
    window = int((cfg.n_cs - 1) * cfg.prach_fft // cfg.n_zc) + 1
    rows = []
    for w in cfg.waveforms:
        modem = PrachModem(cfg, w, pre, np.array([], dtype=int))
        hits, worst = 0, 0.0
        for sig in range(pcfg.n_signatures):
            delay = (7 * sig) % max(window, 1)
            det = detect_signature(_preamble_rx(modem, pcfg, sig, None, None, delay, 0.0), pcfg, modem.layout,
                                   cfg.detection_threshold)
            if det.signature == sig:
                hits += 1
                worst = max(worst, abs(det.delay - delay * cfg.ts))
        base = dict(experiment="detect", waveform=w, trials=cfg.trials, seed=cfg.seed)
        rows += [
            ResultRow(sweep={"snr_db": math.inf}, metric="detection_rate", value=hits / pcfg.n_signatures,
                      n_events=hits, n_total=pcfg.n_signatures, **base),
            ResultRow(sweep={"snr_db": math.inf}, metric="delay_error_max_s", value=worst, **base),
            ResultRow(sweep={"snr_db": math.inf}, metric="pdp_bin_s", value=bin_s, **base),
        ]
        for snr in cfg.snr_db:
            nv = noise_var_for(snr)
            hits = 0
            for tr in range(cfg.trials):
                rng = trial_rng(cfg.seed, _EXP_KEYS["detect"], tr)
                sig = int(rng.integers(pcfg.n_signatures))
                ch = MultipathChannel.random(rng, cfg.n_taps, cfg.prach_channel_len)
                det = detect_signature(_preamble_rx(modem, pcfg, sig, rng, ch, 0, nv), pcfg, modem.layout,
                                       cfg.detection_threshold)
                hits += int(det.signature == sig)
            if cfg.trials:
                rows.append(ResultRow(sweep={"snr_db": float(snr)}, metric="detection_rate",
                                      value=hits / cfg.trials, n_events=hits, n_total=cfg.trials, **base))
    return rows


def chanest_report(cfg: ScenarioConfig) -> list[ResultRow]:
    """Frequency-response MSE of the preamble-based estimate outside the preamble band.

    For each distance ``d`` the error is averaged over the two bins ``d``
    subcarriers beyond either band edge.
    """
    if cfg.trials == 0:
        return []
    pcfg = PreambleConfig(cfg.n_zc, cfg.n_cs, cfg.n_cf)
    pre, _, _ = prach_bins(cfg, 0)
    h = int(pre.max())
    dists = np.asarray(cfg.chanest_distances)
    eval_bins = np.concatenate([-(h + dists), h + dists])
    rows = []
    for w in cfg.waveforms:
        modem = PrachModem(cfg, w, pre, np.array([], dtype=int))
        lay = modem.layout
        for snr in cfg.snr_db:
            nv = noise_var_for(snr)
            cvar = modem.coefficient_noise_var(nv) / lay.k
            tau = cfg.tikhonov_tau if cfg.tikhonov_tau is not None else tikhonov_weight(cvar, cfg.prach_channel_len)
            err = np.zeros(eval_bins.size)
            inband = 0.0
            for tr in range(cfg.trials):
                rng = trial_rng(cfg.seed, _EXP_KEYS["chanest"], tr)
                sig = int(rng.integers(pcfg.n_signatures))
                ch = MultipathChannel.random(rng, cfg.n_taps, cfg.prach_channel_len)
                y = _preamble_rx(modem, pcfg, sig, rng, ch, 0, nv)
                X = preamble_coefficients(sig, pcfg)
                est = estimate_channel(y, X, cfg.prach_channel_len, max(tau, 1e-12), n_fft=lay.n_fft, bins=pre)
                err += np.abs(est.response(eval_bins) - ch.frequency_response(eval_bins, lay.n_fft)) ** 2
                inband += float(np.mean(np.abs(est.response(pre) - ch.frequency_response(pre, lay.n_fft)) ** 2))
            err /= cfg.trials
            per_d = (err[: dists.size] + err[dists.size :]) / 2
            base = dict(experiment="chanest", waveform=w, trials=cfg.trials, seed=cfg.seed)
            rows.append(ResultRow(sweep={"snr_db": float(snr), "distance": 0}, metric="mse",
                                  value=inband / cfg.trials, **base))
            rows += [
                ResultRow(sweep={"snr_db": float(snr), "distance": int(d)}, metric="mse", value=float(v), **base)
                for d, v in zip(dists, per_d)
            ]
    return rows


def _recorded_preamble(cfg: ScenarioConfig, r: SampledSignal):
    if abs(r.ts - cfg.ts) > 1e-9 * cfg.ts:
        raise ValueError(f"sample period {r.ts} differs from the scenario's {cfg.ts}")
    pcfg = PreambleConfig(cfg.n_zc, cfg.n_cs, cfg.n_cf)
    pre, _, _ = prach_bins(cfg, 0)
    w = cfg.waveforms[0]
    modem = PrachModem(cfg, w, pre, np.array([], dtype=int))
    Y = modem.demodulate(r)
    return w, pcfg, pre, modem, Y[:, pre % modem.layout.n_fft].mean(axis=0)


def detect_from_samples(cfg: ScenarioConfig, r: SampledSignal) -> list[ResultRow]:
    """Detect the preamble in a recorded receive window of the first configured waveform."""
    w, pcfg, _, modem, y = _recorded_preamble(cfg, r)
    det = detect_signature(y, pcfg, modem.layout, cfg.detection_threshold)
    vals = [
        ("detected", float(det.detected)),
        ("signature", float(det.signature) if det.detected else float("nan")),
        ("delay_s", det.delay),
        ("peak_power", det.peak_power),
    ]
    return [ResultRow("detect", w, {}, m, v, 0, cfg.seed) for m, v in vals]


def chanest_from_samples(cfg: ScenarioConfig, r: SampledSignal) -> list[ResultRow]:
    """Detect the preamble in a recorded window and estimate the channel taps from it."""
    w, pcfg, pre, modem, y = _recorded_preamble(cfg, r)
    det = detect_signature(y, pcfg, modem.layout, cfg.detection_threshold)
    if not det.detected:
        return [ResultRow("chanest", w, {}, "detected", 0.0, 0, cfg.seed)]
    nv = noise_var_for(cfg.snr_db[0])
    cvar = modem.coefficient_noise_var(nv) / modem.layout.k
    tau = cfg.tikhonov_tau if cfg.tikhonov_tau is not None else tikhonov_weight(cvar, cfg.prach_channel_len)
    X = preamble_coefficients(det.signature, pcfg)
    est = estimate_channel(y, X, cfg.prach_channel_len, max(tau, 1e-12), n_fft=modem.layout.n_fft, bins=pre)
    rows = [
        ResultRow("chanest", w, {}, "detected", 1.0, 0, cfg.seed),
        ResultRow("chanest", w, {}, "signature", float(det.signature), 0, cfg.seed),
    ]
    for i, h in enumerate(est.taps):
        rows.append(ResultRow("chanest", w, {"index": i}, "tap_re", float(h.real), 0, cfg.seed))
        rows.append(ResultRow("chanest", w, {"index": i}, "tap_im", float(h.imag), 0, cfg.seed))
    return rows


# Dispatcher -----------------------------------------------------------------

_RUNNERS = {
    "ser-offset": sweep_ser_vs_offset,
    "ser-snr": sweep_ser_vs_snr,
    "pusch": sweep_pusch_ser_vs_dprach,
    "psd": psd_report,
    "detect": detection_report,
    "chanest": chanest_report,
    "ici": sweep_ici,
    "bound": sweep_bounds,
    "pulse": pulse_report,
}
_MONTE_CARLO = {"ser-offset", "ser-snr", "pusch", "psd", "detect", "chanest"}


def run_scenario(cfg: ScenarioConfig) -> list[ResultRow]:
    """Run every experiment listed in ``cfg.experiments`` in order.

    Monte Carlo experiments with ``trials == 0`` produce no rows.
    """
    cfg.validate()
    rows = []
    for exp in cfg.experiments:
        if exp in _MONTE_CARLO and cfg.trials == 0:
            continue
        rows += _RUNNERS[exp](cfg)
    return rows
