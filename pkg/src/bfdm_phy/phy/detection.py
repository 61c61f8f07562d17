"""Preamble detection from power delay profiles."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionError, ParameterError
from .modem import FrameLayout
from .preamble import PreambleConfig, preamble_spectrum, zc_root

__all__ = ["DetectionResult", "power_delay_profiles", "detect_signature", "detect_signatures"]


@dataclass(frozen=True, eq=False)
class DetectionResult:
    """Outcome of a detection attempt.

    Attributes
    ----------
    signature : int or None
        Detected signature, ``None`` if no peak passed the threshold or the
        peak lag maps to no valid signature.
    delay : float
        Round-trip delay estimate in seconds (non-negative).
    peak_power : float
    root_position, lag : int
        Location of the peak.
    pdps : ndarray
        Power delay profile per root, shape ``(n_roots, n_zc)``.
    """

    signature: int | None
    delay: float
    peak_power: float
    root_position: int
    lag: int
    pdps: np.ndarray = field(repr=False)

    @property
    def detected(self) -> bool:
        return self.signature is not None


def power_delay_profiles(y: np.ndarray, cfg: PreambleConfig) -> np.ndarray:
    """``|sum_n y[n] conj(x_u[n + d])|^2`` for every root ``u`` and lag ``d``.

    ``y`` holds the received preamble-bin coefficients in ascending bin order.
    """
    y = np.asarray(y, dtype=complex)
    if y.shape != (cfg.n_zc,):
        raise DimensionError(f"expected {cfg.n_zc} preamble coefficients, got {y.shape}")
    out = np.empty((cfg.n_root, cfg.n_zc))
    for i, u in enumerate(cfg.roots[: cfg.n_root]):
        X = preamble_spectrum(zc_root(u, cfg.n_zc))
        z = cfg.n_zc * np.fft.ifft(y * X.conj())
        out[i] = np.abs(z) ** 2
    return out


def _result(pdps, cfg, layout, r, lag, threshold):
    peak = float(pdps[r, lag])
    v = lag // cfg.n_cs
    delay = (lag % cfg.n_cs) * layout.n_fft / cfg.n_zc * layout.ts
    sig = cfg.n_shifts * r + v
    ok = peak > threshold * float(pdps[r].mean()) and v < cfg.n_shifts and sig < cfg.n_signatures
    return DetectionResult(sig if ok else None, delay, peak, r, lag, pdps)


def detect_signature(
    y: np.ndarray, cfg: PreambleConfig, layout: FrameLayout, threshold: float = 8.0
) -> DetectionResult:
    """Detect the strongest preamble.

    The peak over all roots and lags is accepted when it exceeds
    ``threshold`` times the mean of its root's delay profile. The signature is
    ``V * root_position + lag // n_cs`` and the delay is recovered from the
    position inside the cyclic-shift window.
    """
    if threshold <= 0:
        raise ParameterError("threshold must be positive")
    pdps = power_delay_profiles(y, cfg)
    r, lag = np.unravel_index(int(np.argmax(pdps)), pdps.shape)
    return _result(pdps, cfg, layout, int(r), int(lag), threshold)


def detect_signatures(
    y: np.ndarray, cfg: PreambleConfig, layout: FrameLayout, threshold: float = 8.0
) -> list[DetectionResult]:
    """Detect at most one preamble per root, each from its own delay profile."""
    pdps = power_delay_profiles(y, cfg)
    found = []
    for r in range(pdps.shape[0]):
        res = _result(pdps, cfg, layout, r, int(np.argmax(pdps[r])), threshold)
        if res.detected:
            found.append(res)
    return found
