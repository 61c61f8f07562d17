"""Uplink shared data channel: cyclic-prefix OFDM with optional DFT spreading."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import FramingError, LayoutError
from ..gabor import SampledSignal

__all__ = ["PuschConfig", "pusch_modulate", "pusch_demodulate"]


@dataclass(frozen=True, eq=False)
class PuschConfig:
    """Numerology and subcarrier allocation of the data channel.

    Attributes
    ----------
    n_fft : int
        FFT size; the subcarrier spacing is ``1 / (n_fft ts)``.
    bins : ndarray of int
        Signed occupied subcarriers in ascending order.
    clusters : tuple of ndarray
        Partition of ``range(len(bins))`` into contiguous DFT-spreading blocks.
    cp_first, cp_other : int
        Prefix lengths of the first and remaining symbols of a slot.
    symbols_per_slot, n_slots : int
    ts : float
    """

    n_fft: int
    bins: np.ndarray
    clusters: tuple
    cp_first: int
    cp_other: int
    symbols_per_slot: int = 7
    n_slots: int = 8
    ts: float = 1.0

    def __post_init__(self):
        b = np.asarray(self.bins, dtype=int).ravel()
        object.__setattr__(self, "bins", b)
        cl = tuple(np.asarray(c, dtype=int).ravel() for c in self.clusters)
        object.__setattr__(self, "clusters", cl)
        if np.unique(b).size != b.size or np.any(np.diff(b) <= 0):
            raise LayoutError("PUSCH bins must be strictly ascending")
        if b.size and (b.min() < -self.n_fft // 2 or b.max() >= self.n_fft // 2):
            raise LayoutError("PUSCH bins exceed the FFT size")
        allc = np.sort(np.concatenate(cl)) if cl else np.array([], int)
        if not np.array_equal(allc, np.arange(b.size)):
            raise LayoutError("clusters must partition the subcarriers")

    @property
    def n_symbols(self) -> int:
        return self.symbols_per_slot * self.n_slots

    @property
    def n_subcarriers(self) -> int:
        return self.bins.size

    def cp_lengths(self) -> np.ndarray:
        cps = np.full(self.n_symbols, self.cp_other)
        cps[:: self.symbols_per_slot] = self.cp_first
        return cps

    @property
    def frame_len(self) -> int:
        return int(self.cp_lengths().sum() + self.n_symbols * self.n_fft)

    def starts(self) -> np.ndarray:
        """Start index of every symbol body."""
        cps = self.cp_lengths()
        period = cps + self.n_fft
        return np.concatenate([[0], np.cumsum(period)[:-1]]) + cps


def _spread(x: np.ndarray, cfg: PuschConfig, inverse: bool) -> np.ndarray:
    out = np.empty_like(x)
    f = np.fft.ifft if inverse else np.fft.fft
    for c in cfg.clusters:
        out[:, c] = f(x[:, c], axis=1, norm="ortho")
    return out


def pusch_modulate(symbols, cfg: PuschConfig, dft_spread: bool = True) -> SampledSignal:
    """Transmit ``(n_symbols, n_subcarriers)`` data symbols.

    Each occupied subcarrier contributes ``1 / n_fft`` power per sample, which
    is a unit in-band power spectral density.
    """
    x = np.asarray(symbols, dtype=complex)
    if x.shape != (cfg.n_symbols, cfg.n_subcarriers):
        raise LayoutError(f"symbols must have shape {(cfg.n_symbols, cfg.n_subcarriers)}")
    if dft_spread:
        x = _spread(x, cfg, inverse=False)
    grid = np.zeros((cfg.n_symbols, cfg.n_fft), dtype=complex)
    grid[:, cfg.bins % cfg.n_fft] = x
    body = np.fft.ifft(grid, axis=1) * math.sqrt(cfg.n_fft)
    parts = []
    for i, cp in enumerate(cfg.cp_lengths()):
        parts.append(body[i, cfg.n_fft - cp :])
        parts.append(body[i])
    return SampledSignal(np.concatenate(parts), cfg.ts, 0)


def pusch_demodulate(
    r: SampledSignal,
    cfg: PuschConfig,
    dft_spread: bool = True,
    channel_response=None,
    noise_var: float | None = None,
) -> np.ndarray:
    """Receive data symbols with a one-tap equalizer per subcarrier.

    ``channel_response`` has shape ``(n_subcarriers,)`` or
    ``(n_symbols, n_subcarriers)``. With ``noise_var`` the equalizer is the
    linear MMSE tap ``conj(H) / (|H|^2 + noise_var)``, otherwise zero forcing.
    """
    if len(r) != cfg.frame_len:
        raise FramingError(f"received frame has {len(r)} samples, expected {cfg.frame_len}")
    idx = cfg.starts()[:, None] + np.arange(cfg.n_fft)[None, :]
    Y = np.fft.fft(r.samples[idx], axis=1) / math.sqrt(cfg.n_fft)
    Y = Y[:, cfg.bins % cfg.n_fft]
    if channel_response is not None:
        H = np.broadcast_to(np.asarray(channel_response), Y.shape)
        if noise_var is None:
            Y = Y / H
        else:
            Y = Y * H.conj() / (np.abs(H) ** 2 + noise_var)
    if dft_spread:
        Y = _spread(Y, cfg, inverse=True)
    return Y
