"""Link impairments: sparse multipath, time/frequency offsets, and AWGN."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, PreconditionError
from .gabor import SampledSignal, TFOffset, tf_shift

__all__ = [
    "MultipathChannel",
    "LinkImpairments",
    "apply_multipath",
    "apply_offset",
    "apply_awgn",
    "noise_variance",
    "add_noise",
]


@dataclass(frozen=True, eq=False)
class MultipathChannel:
    """Sparse tapped delay line ``h[n] = sum_j gain_j delta[n - delay_j]``.

    Attributes
    ----------
    delays : ndarray of int
        Distinct non-negative tap delays in samples, each below ``max_len``.
    gains : ndarray of complex
    max_len : int
        Length of the tap window (the estimator's ``n_h``).
    """

    delays: np.ndarray
    gains: np.ndarray
    max_len: int

    def __post_init__(self):
        d = np.asarray(self.delays, dtype=int).ravel()
        g = np.asarray(self.gains, dtype=complex).ravel()
        if d.size != g.size or d.size == 0:
            raise PreconditionError("delays and gains must be non-empty and equally long")
        if np.any(d < 0) or np.any(d >= self.max_len):
            raise PreconditionError(f"tap delays must lie in [0, {self.max_len})")
        if np.unique(d).size != d.size:
            raise PreconditionError("tap delays must be distinct")
        object.__setattr__(self, "delays", d)
        object.__setattr__(self, "gains", g)

    @classmethod
    def random(cls, rng: np.random.Generator, n_taps: int = 3, max_len: int = 300) -> "MultipathChannel":
        """I.i.d. circular Gaussian taps with unit total expected power.

        Delays are drawn uniformly without replacement from ``[0, max_len)``.
        """
        if not 1 <= n_taps <= max_len:
            raise PreconditionError("need 1 <= n_taps <= max_len")
        delays = np.sort(rng.choice(max_len, size=n_taps, replace=False))
        gains = (rng.standard_normal(n_taps) + 1j * rng.standard_normal(n_taps)) / math.sqrt(2 * n_taps)
        return cls(delays, gains, max_len)

    def impulse_response(self) -> np.ndarray:
        h = np.zeros(self.max_len, dtype=complex)
        h[self.delays] = self.gains
        return h

    def frequency_response(self, bins, n_fft: int) -> np.ndarray:
        """``H[l] = sum_j gain_j exp(-i 2 pi l delay_j / n_fft)`` at signed bins."""
        bins = np.asarray(bins)
        return np.exp(-2j * np.pi * np.outer(bins, self.delays) / n_fft) @ self.gains

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["delay", "re", "im"])
            for d, g in zip(self.delays, self.gains):
                w.writerow([int(d), repr(float(g.real)), repr(float(g.imag))])

    @classmethod
    def from_csv(cls, path, max_len: int) -> "MultipathChannel":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0].astype(int), data[:, 1] + 1j * data[:, 2], max_len)


@dataclass(frozen=True)
class LinkImpairments:
    """Time offset [s], carrier frequency offset [Hz] and SNR [dB] of a link."""

    time_offset: float = 0.0
    freq_offset: float = 0.0
    snr_db: float = math.inf


def apply_multipath(s: SampledSignal, ch: MultipathChannel, mode: str = "linear") -> SampledSignal:
    """Convolve with the tapped delay line.

    ``"linear"`` truncates the convolution to the frame length; ``"circular"``
    treats the frame as one period of a periodic signal.
    """
    x = s.samples
    y = np.zeros_like(x)
    for d, g in zip(ch.delays, ch.gains):
        if mode == "circular":
            y += g * np.roll(x, d)
        elif mode == "linear":
            if d < x.size:
                y[d:] += g * x[: x.size - d]
        else:
            raise PreconditionError(f"unknown convolution mode {mode!r}")
    return s.with_samples(y)


def apply_offset(s: SampledSignal, imp: LinkImpairments) -> SampledSignal:
    """Apply the circular time offset and the carrier frequency offset."""
    if not (math.isfinite(imp.time_offset) and math.isfinite(imp.freq_offset)):
        raise ParameterError("offsets must be finite")
    return tf_shift(s, TFOffset(imp.time_offset, imp.freq_offset))


def noise_variance(reference: SampledSignal, snr_db: float, occupied_fraction: float = 1.0) -> float:
    """Per-sample noise variance giving ``snr_db`` over the occupied band.

    The in-band signal power density is ``mean |s|^2 / occupied_fraction``,
    where ``occupied_fraction`` is the occupied bandwidth over the sample rate.
    """
    if not 0 < occupied_fraction <= 1:
        raise ParameterError("occupied_fraction must lie in (0, 1]")
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    power = float(np.mean(np.abs(reference.samples) ** 2))
    if power == 0.0:
        raise ParameterError("SNR is undefined for a zero-power signal")
    return power / occupied_fraction / 10 ** (snr_db / 10)


def apply_awgn(
    s: SampledSignal,
    snr_db: float,
    rng: np.random.Generator,
    occupied_fraction: float = 1.0,
    reference: SampledSignal | None = None,
) -> SampledSignal:
    """Add circular white Gaussian noise at ``snr_db``.

    The noise level is computed from ``reference`` (defaults to ``s``).
    An infinite SNR returns the input unchanged.
    """
    var = noise_variance(s if reference is None else reference, snr_db, occupied_fraction)
    return add_noise(s, var, rng)


def add_noise(s: SampledSignal, noise_var: float, rng: np.random.Generator) -> SampledSignal:
    """Add circular white Gaussian noise of the given per-sample variance."""
    if noise_var < 0:
        raise ParameterError("noise variance must be non-negative")
    if noise_var == 0:
        return s
    n = math.sqrt(noise_var / 2) * (rng.standard_normal(len(s)) + 1j * rng.standard_normal(len(s)))
    return s.with_samples(s.samples + n)
