"""Scenario configuration with the LTE reference numerology and a desk preset."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field

from ..errors import ConfigError

__all__ = ["ScenarioConfig", "load_config", "PRESETS", "WAVEFORMS"]

WAVEFORMS = ("cp-ofdm", "bfdm-spline")
EXPERIMENTS = ("ser-offset", "ser-snr", "pusch", "psd", "detect", "chanest", "ici", "bound", "pulse")

FS_REF = 30.72e6


@dataclass
class ScenarioConfig:
    """All parameters of a simulation scenario.

    Sample counts are at the scenario sampling rate ``fs = 30.72 MHz / scale``.
    """

    preset: str = "table1"
    scale: int = 1
    # Uplink shared data channel
    pusch_bandwidth_hz: float = 20e6
    pusch_spacing_hz: float = 15e3
    pusch_fft: int = 2048
    pusch_subcarriers: int = 1200
    pusch_symbols: int = 14
    pusch_cp_first: int = 160
    pusch_cp_other: int = 144
    pusch_tf: float = 1.073
    # Random access
    prach_bandwidth_hz: float = 1.08e6
    prach_spacing_hz: float = 1.25e3
    prach_fft: int = 24576
    n_zc: int = 839
    prach_cp: int = 3168
    prach_gt: int = 2976
    prach_symbols: int = 1
    prach_tf: float = 1.25
    pulse_len: int = 122880
    n_cs: int = 13
    n_cf: int = 0
    prach_region_half: int = 36
    # Waveforms and pulses
    waveforms: list = field(default_factory=lambda: list(WAVEFORMS))
    alpha: float = 0.85
    # D-PRACH data
    modulation: str = "4qam"
    data_per_side: int = 10
    guard_bands: list = field(default_factory=lambda: [0])
    dprach_counts: list = field(default_factory=lambda: [0, 4, 8, 12, 16, 20])
    dft_spread: list = field(default_factory=lambda: [True, False])
    # Channel and link
    n_taps: int = 3
    prach_channel_len: int = 300
    pusch_channel_len: int = 144
    second_user_offsets_us: list = field(default_factory=lambda: [0.0, 50.0, 100.0, 150.0, 200.0, 300.0, 400.0, 500.0])
    second_user_cfo_hz: float = 0.0
    fixed_offset_us: float = 200.0
    snr_db: list = field(default_factory=lambda: [25.0])
    pusch_snr_db: float = 15.0
    perfect_csi: bool = False
    tikhonov_tau: float | None = None
    detection_threshold: float = 8.0
    # Interference sweeps
    ici_subcarriers: int = 200
    ici_freq_offsets: list = field(default_factory=lambda: [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3])
    ici_time_offsets_us: list = field(default_factory=lambda: [-200.0, -100.0, -50.0, 0.0, 50.0, 100.0, 150.0, 200.0])
    alphas: list = field(default_factory=lambda: [round(0.5 + 0.05 * i, 2) for i in range(21)])
    pulse_kind: str = "rx"
    chanest_distances: list = field(default_factory=lambda: [1, 5, 10, 20, 50, 100, 200])
    # PSD
    welch_nfft: int = 4096
    welch_overlap: float = 0.5
    # Monte Carlo
    experiments: list = field(default_factory=lambda: ["ser-offset"])
    trials: int = 1000
    seed: int = 0

    # Derived quantities -------------------------------------------------
    @property
    def fs(self) -> float:
        return FS_REF / self.scale

    @property
    def ts(self) -> float:
        return 1.0 / self.fs

    @property
    def prach_symbol_len(self) -> int:
        """Symbol period ``N`` of the random-access channel in samples."""
        return round(self.prach_tf * self.prach_fft)

    @property
    def prach_frame_len(self) -> int:
        return self.pulse_len

    @property
    def pusch_frame_len(self) -> int:
        slots = 2 * self.pusch_frame_len_ms
        return slots * (self.pusch_cp_first + 6 * self.pusch_cp_other + 7 * self.pusch_fft)

    @property
    def pusch_frame_len_ms(self) -> int:
        return round(self.pulse_len * self.ts * 1e3)

    def validate(self) -> "ScenarioConfig":
        bad = []

        def need(cond, name):
            if not cond:
                bad.append(name)

        need(isinstance(self.scale, int) and self.scale >= 1, "scale")
        for name in ("pusch_fft", "pusch_subcarriers", "prach_fft", "n_zc", "pulse_len", "n_cs"):
            need(isinstance(getattr(self, name), int) and getattr(self, name) > 0, name)
        for name in ("prach_cp", "prach_gt", "n_cf", "pusch_cp_first", "pusch_cp_other", "data_per_side"):
            need(isinstance(getattr(self, name), int) and getattr(self, name) >= 0, name)
        need(self.n_zc % 2 == 1 and all(self.n_zc % p for p in range(3, int(math.isqrt(self.n_zc)) + 1, 2)), "n_zc")
        need(0 <= self.n_cf < 64, "n_cf")
        need(self.prach_symbols >= 1, "prach_symbols")
        need(self.prach_cp + self.prach_fft + self.prach_gt == self.prach_symbol_len, "prach_cp")
        need(self.pulse_len % self.prach_symbol_len == 0 and self.pulse_len % self.prach_fft == 0, "pulse_len")
        need(self.pulse_len >= self.prach_symbols * self.prach_symbol_len, "pulse_len")
        need(self.data_per_side % 2 == 0, "data_per_side")
        need(all(w in WAVEFORMS for w in self.waveforms) and len(self.waveforms) > 0, "waveforms")
        need(self.alpha > 0, "alpha")
        need(self.modulation in ("4qam", "bpsk", "16qam"), "modulation")
        need(all(isinstance(g, int) and 0 <= g <= 4 for g in self.guard_bands), "guard_bands")
        need(all(isinstance(c, int) and c >= 0 and c % 2 == 0 for c in self.dprach_counts), "dprach_counts")
        need(1 <= self.n_taps <= min(self.prach_channel_len, self.pusch_channel_len), "n_taps")
        need(self.pusch_channel_len <= self.pusch_cp_other, "pusch_channel_len")
        need(isinstance(self.trials, int) and self.trials >= 0, "trials")
        need(isinstance(self.seed, int) and 0 <= self.seed < 2**64, "seed")
        need(all(e in EXPERIMENTS for e in self.experiments), "experiments")
        need(self.tikhonov_tau is None or self.tikhonov_tau >= 0, "tikhonov_tau")
        need(0 <= self.welch_overlap < 1 and self.welch_nfft > 0, "welch_overlap")
        need(self.detection_threshold > 0, "detection_threshold")
        need(self.pulse_kind in ("tx", "rx"), "pulse_kind")
        need(all(isinstance(d, int) and d >= 1 for d in self.chanest_distances), "chanest_distances")
        for name in ("second_user_offsets_us", "ici_time_offsets_us"):
            vals = getattr(self, name) + ([self.fixed_offset_us] if name.startswith("second") else [])
            ok = all(abs(v * 1e-6 * self.fs - round(v * 1e-6 * self.fs)) < 1e-6 for v in vals)
            need(ok, name)
        half_fft = self.pusch_fft // 2
        need(self.prach_region_half + self.pusch_subcarriers // 2 < half_fft, "pusch_subcarriers")
        need(self.pusch_subcarriers % 2 == 0, "pusch_subcarriers")
        if bad:
            raise ConfigError("invalid configuration fields: " + ", ".join(sorted(set(bad))), sorted(set(bad)))
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_TABLE1 = {}
_DESK = dict(
    preset="desk",
    scale=16,
    pusch_fft=128,
    pusch_subcarriers=72,
    pusch_cp_first=10,
    pusch_cp_other=9,
    prach_fft=1536,
    n_zc=61,
    prach_cp=198,
    prach_gt=186,
    pulse_len=7680,
    n_cs=3,
    prach_region_half=3,
    prach_channel_len=19,
    pusch_channel_len=9,
    second_user_offsets_us=[0.0, 50.0, 100.0, 150.0, 200.0, 300.0, 400.0, 500.0],
    ici_time_offsets_us=[-200.0, -100.0, -50.0, 0.0, 50.0, 100.0, 150.0, 200.0],
    dprach_counts=[0, 2, 4, 6, 8, 10],
    welch_nfft=512,
)
PRESETS = {"table1": _TABLE1, "desk": _DESK}


def load_config(doc: dict | str) -> ScenarioConfig:
    """Build a validated config from a JSON document or mapping.

    The document selects a preset with ``"defaults"`` (``"table1"`` or
    ``"desk"``) and overrides individual fields explicitly.
    """
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    doc = dict(doc)
    preset = doc.pop("defaults", "table1")
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}", ["defaults"])
    names = {f.name for f in dataclasses.fields(ScenarioConfig)}
    unknown = sorted(set(doc) - names)
    if unknown:
        raise ConfigError("unknown configuration fields: " + ", ".join(unknown), unknown)
    values = dict(PRESETS[preset])
    values.update(doc)
    try:
        cfg = ScenarioConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()
