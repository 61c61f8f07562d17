"""Power spectral density estimation."""

from __future__ import annotations

import numpy as np
from scipy.signal import welch

from ..errors import ParameterError
from ..gabor import SampledSignal

__all__ = ["compute_psd", "band_mean_db"]


def compute_psd(s: SampledSignal, nfft_welch: int, overlap: float = 0.5) -> tuple[np.ndarray, np.ndarray]:
    """Welch estimate with a Hann window, returned as ``(freq_hz, psd_db)``.

    Frequencies are centered (negative first). The density is normalized to
    the sample rate, so a white sequence of unit variance reads 0 dB.
    """
    if nfft_welch < 2 or len(s) < nfft_welch:
        raise ParameterError(f"need at least nfft_welch={nfft_welch} samples, got {len(s)}")
    if not 0 <= overlap < 1:
        raise ParameterError("overlap must lie in [0, 1)")
    f, p = welch(
        s.samples,
        fs=1.0,
        window="hann",
        nperseg=nfft_welch,
        noverlap=int(round(overlap * nfft_welch)),
        return_onesided=False,
        scaling="density",
    )
    f = np.fft.fftshift(f) / s.ts
    p = np.fft.fftshift(p)
    return f, 10 * np.log10(np.maximum(p, 1e-300))


def band_mean_db(freq_hz: np.ndarray, psd_db: np.ndarray, lo: float, hi: float) -> float:
    """Mean linear PSD over ``[lo, hi]`` Hz, in dB."""
    sel = (freq_hz >= lo) & (freq_hz <= hi)
    if not sel.any():
        raise ParameterError("band contains no PSD bins")
    return float(10 * np.log10(np.mean(10 ** (psd_db[sel] / 10))))
