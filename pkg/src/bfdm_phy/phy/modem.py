"""Random-access multicarrier modems: pulse-shaped (BFDM) and cyclic-prefix OFDM.

Subcarrier ``l`` of symbol ``k`` carries the atom
``g(n - n0 - kN) exp(i 2 pi n l / n_fft)``, where ``n`` is the absolute sample
index in a periodized frame and ``n0`` the start offset of the burst. Bins are
signed integers; negative bins lie below DC.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import FramingError, LayoutError
from ..gabor import SampledSignal

__all__ = [
    "FrameLayout",
    "calibrate_beta",
    "bfdm_modulate",
    "bfdm_demodulate",
    "ofdm_prach_modulate",
    "ofdm_prach_demodulate",
]


@dataclass(frozen=True, eq=False)
class FrameLayout:
    """Frame geometry of a random-access slot.

    Attributes
    ----------
    n_fft : int
        Subcarrier grid size; the spacing is ``1 / (n_fft ts)``.
    n : int
        Symbol period in samples.
    k : int
        Symbols per burst.
    p : int
        Pulse length in samples.
    preamble_bins, data_bins : ndarray of int
        Disjoint signed subcarrier indices.
    beta : float
        Amplitude scale applied at the transmitter.
    ts : float
        Sampling interval in seconds.
    n_frame : int, optional
        Length of the periodized frame; defaults to ``k n``. A longer frame
        holds a single short burst of symbols inside a longer window.
    offset : int
        Start of symbol 0. For pulse-shaped symbols this is where the pulse
        origin sits; for prefixed symbols it is the first prefix sample.
    """

    n_fft: int
    n: int
    k: int
    p: int
    preamble_bins: np.ndarray
    data_bins: np.ndarray
    beta: float = 1.0
    ts: float = 1.0
    n_frame: int | None = None
    offset: int = 0

    def __post_init__(self):
        pb = np.asarray(self.preamble_bins, dtype=int).ravel()
        db = np.asarray(self.data_bins, dtype=int).ravel()
        object.__setattr__(self, "preamble_bins", pb)
        object.__setattr__(self, "data_bins", db)
        if min(self.n_fft, self.n, self.k, self.p) <= 0:
            raise LayoutError("n_fft, n, k and p must be positive")
        if self.n_frame is None:
            object.__setattr__(self, "n_frame", self.n * self.k)
        if self.n_frame < self.n * self.k:
            raise LayoutError("frame shorter than k symbol periods")
        if self.n_frame % self.n_fft:
            raise LayoutError("frame length must be a multiple of n_fft")
        if self.p > self.n_frame:
            raise LayoutError("pulse longer than the frame")
        if not 0 <= self.offset < self.n_frame:
            raise LayoutError("offset must lie inside the frame")
        both = np.concatenate([pb, db])
        if np.unique(both).size != both.size:
            raise LayoutError("preamble and data bins must be distinct")
        if both.size and (both.min() < -self.n_fft // 2 or both.max() >= self.n_fft // 2):
            raise LayoutError("bins must lie in [-n_fft/2, n_fft/2)")
        if not self.beta > 0:
            raise LayoutError("beta must be positive")

    @property
    def frame_len(self) -> int:
        return self.n_frame

    @property
    def active_bins(self) -> np.ndarray:
        return np.concatenate([self.preamble_bins, self.data_bins])

    def grid(self, preamble=None, data=None, data_bins=None) -> np.ndarray:
        """Build a ``(k, n_fft)`` symbol grid.

        ``preamble`` (one coefficient per preamble bin) is repeated on every
        symbol; ``data`` has shape ``(k, len(data_bins))``.
        """
        g = np.zeros((self.k, self.n_fft), dtype=complex)
        if preamble is not None:
            g[:, self.preamble_bins % self.n_fft] = np.asarray(preamble)[None, :]
        if data is not None:
            bins = self.data_bins if data_bins is None else np.asarray(data_bins, dtype=int)
            if not np.isin(bins, self.data_bins).all():
                raise LayoutError("data placed outside the data bins")
            g[:, bins % self.n_fft] = data
        return g

    @staticmethod
    def extract(Y: np.ndarray, bins) -> np.ndarray:
        """Pick signed ``bins`` from a demodulated ``(k, n_fft)`` grid."""
        return Y[:, np.asarray(bins, dtype=int) % Y.shape[1]]


def calibrate_beta(layout: FrameLayout, atom_energy: float = 1.0) -> float:
    """Scale giving an in-band power spectral density of one.

    One subcarrier contributes ``atom_energy / n`` power per sample over a
    bandwidth of ``1 / n_fft`` of the sample rate, so the density of
    ``beta^2 * atom_energy * n_fft / n`` is set to one. The uplink data
    channel in this package is normalized to the same density.
    """
    return math.sqrt(layout.n / (layout.n_fft * atom_energy))


def _check_grid(grid: np.ndarray, layout: FrameLayout) -> np.ndarray:
    grid = np.asarray(grid, dtype=complex)
    if grid.shape != (layout.k, layout.n_fft):
        raise LayoutError(f"grid must have shape {(layout.k, layout.n_fft)}, got {grid.shape}")
    return grid


def _placed_pulse(pulse: SampledSignal, L: int, start: int) -> np.ndarray:
    """Pulse on an ``L``-sample circle with its origin at index ``start``."""
    buf = np.zeros(L, dtype=complex)
    buf[: len(pulse)] = pulse.samples
    return np.roll(buf, start - pulse.origin_index)


def bfdm_modulate(grid, g: SampledSignal, layout: FrameLayout) -> SampledSignal:
    """Synthesize ``beta sum_{k,l} X[k,l] g(n - kN) exp(i 2 pi n l / n_fft)``."""
    grid = _check_grid(grid, layout)
    if len(g) != layout.p:
        raise LayoutError(f"pulse length {len(g)} differs from layout p={layout.p}")
    L = layout.frame_len
    reps = L // layout.n_fft
    s = np.zeros(L, dtype=complex)
    periodic = layout.n_fft * np.fft.ifft(grid, axis=1)
    for k in range(layout.k):
        if not grid[k].any():
            continue
        s += np.tile(periodic[k], reps) * _placed_pulse(g, L, layout.offset + k * layout.n)
    return SampledSignal(layout.beta * s, g.ts, 0)


def bfdm_demodulate(r: SampledSignal, gamma: SampledSignal, layout: FrameLayout) -> np.ndarray:
    """Correlate with the dual atoms and return the ``(k, n_fft)`` grid over ``beta``.

    Each symbol is windowed by the shifted dual, folded modulo ``n_fft`` and
    transformed with one FFT.
    """
    if layout.p % layout.n_fft:
        raise LayoutError("pulse length must be a multiple of n_fft")
    L = layout.frame_len
    if len(r) != L:
        raise FramingError(f"received frame has {len(r)} samples, expected {L}")
    if len(gamma) != layout.p:
        raise LayoutError("dual pulse length differs from layout p")
    out = np.empty((layout.k, layout.n_fft), dtype=complex)
    for k in range(layout.k):
        w = r.samples * _placed_pulse(gamma, L, layout.offset + k * layout.n).conj()
        out[k] = np.fft.fft(w.reshape(-1, layout.n_fft).sum(axis=0))
    return out / layout.beta


def ofdm_prach_modulate(grid, layout: FrameLayout, n_cp: int) -> SampledSignal:
    """Cyclic-prefix OFDM random-access transmitter.

    Each symbol period is ``[prefix | body | guard]`` with an ``n_fft``-sample
    body, an ``n_cp``-sample prefix and a silent guard filling the period.
    Atoms have unit energy.
    """
    grid = _check_grid(grid, layout)
    n_u = layout.n_fft
    n_gt = layout.n - n_cp - n_u
    if n_cp < 0 or n_gt < 0:
        raise FramingError("prefix and body do not fit in the symbol period")
    body = n_u * np.fft.ifft(grid, axis=1) / math.sqrt(n_u + n_cp)
    sym = np.concatenate([body[:, n_u - n_cp :], body, np.zeros((layout.k, n_gt))], axis=1).ravel()
    sym = np.concatenate([sym, np.zeros(layout.frame_len - sym.size)])
    return SampledSignal(layout.beta * np.roll(sym, layout.offset), layout.ts, 0)


def ofdm_prach_demodulate(r: SampledSignal, layout: FrameLayout, n_cp: int) -> np.ndarray:
    """Remove the prefix, transform each body, and undo the transmit scaling."""
    n_u = layout.n_fft
    if len(r) != layout.frame_len:
        raise FramingError(f"received frame has {len(r)} samples, expected {layout.frame_len}")
    if n_cp < 0 or layout.n - n_cp - n_u < 0:
        raise FramingError("prefix and body do not fit in the symbol period")
    x = np.roll(r.samples, -layout.offset)
    sym = x[: layout.k * layout.n].reshape(layout.k, layout.n)[:, n_cp : n_cp + n_u]
    return np.fft.fft(sym, axis=1) * math.sqrt(n_u + n_cp) / n_u / layout.beta
