"""Regularized least-squares channel estimation from a known preamble."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError, IllConditionedError, ParameterError

__all__ = ["ChannelEstimate", "estimate_channel", "tikhonov_weight", "dft_rows"]

_MAX_COND = 1e8


def dft_rows(bins, n_h: int, n_fft: int) -> np.ndarray:
    """``W[i, j] = exp(-i 2 pi bins[i] j / n_fft)`` for taps ``j < n_h``."""
    return np.exp(-2j * np.pi * np.outer(np.asarray(bins), np.arange(n_h)) / n_fft)


@dataclass(frozen=True, eq=False)
class ChannelEstimate:
    """Estimated impulse response on ``n_h`` taps."""

    taps: np.ndarray
    n_fft: int
    mse_vs_truth: float | None = None

    def response(self, bins) -> np.ndarray:
        """Frequency response at signed ``bins``."""
        return dft_rows(bins, self.taps.size, self.n_fft) @ self.taps


def tikhonov_weight(noise_var: float, n_h: int, channel_power: float = 1.0) -> float:
    """Weight ``tau`` matching an i.i.d. tap prior of variance ``channel_power / n_h``.

    ``tau^2 = noise_var n_h / channel_power`` makes the regularized estimate
    the linear MMSE estimate under that prior.
    """
    if noise_var < 0 or n_h < 1 or channel_power <= 0:
        raise ParameterError("need noise_var >= 0, n_h >= 1, channel_power > 0")
    return math.sqrt(noise_var * n_h / channel_power)


def estimate_channel(
    y,
    preamble,
    n_h: int,
    gamma_reg: float,
    *,
    n_fft: int,
    bins=None,
    truth=None,
) -> ChannelEstimate:
    """Solve ``min ||y - diag(X) W h||^2 + tau^2 ||h||^2``.

    Parameters
    ----------
    y, preamble : array_like
        Received and transmitted coefficients on the preamble bins.
    n_h : int
        Number of taps.
    gamma_reg : float
        Regularization weight ``tau`` (``Gamma = tau I``).
    n_fft : int
        Subcarrier grid size.
    bins : array_like, optional
        Signed bins of ``y``; defaults to the centered block.
    truth : array_like, optional
        True taps (length ``n_h``); if given, the tap-domain mean squared
        error is reported.

    Raises
    ------
    IllConditionedError
        If ``gamma_reg`` is zero and the unregularized problem is singular.
    """
    y = np.asarray(y, dtype=complex)
    X = np.asarray(preamble, dtype=complex)
    if y.shape != X.shape or y.ndim != 1:
        raise DimensionError("y and preamble must be equally long vectors")
    if n_h < 1:
        raise ParameterError("n_h must be positive")
    if gamma_reg < 0:
        raise ParameterError("gamma_reg must be non-negative")
    if bins is None:
        bins = np.arange(y.size) - (y.size - 1) // 2
    bins = np.asarray(bins)
    if bins.shape != y.shape:
        raise DimensionError("bins must match y")
    Phi = X[:, None] * dft_rows(bins, n_h, n_fft)
    if gamma_reg == 0:
        if n_h > y.size or np.linalg.cond(Phi) > _MAX_COND:
            raise IllConditionedError(
                "unregularized estimate is ill-conditioned; use gamma_reg > 0", np.linalg.cond(Phi)
            )
        h = np.linalg.lstsq(Phi, y, rcond=None)[0]
    else:
        A = Phi.conj().T @ Phi + gamma_reg**2 * np.eye(n_h)
        h = np.linalg.solve(A, Phi.conj().T @ y)
    mse = None
    if truth is not None:
        t = np.asarray(truth, dtype=complex)
        if t.shape != h.shape:
            raise DimensionError("truth must have n_h taps")
        mse = float(np.mean(np.abs(h - t) ** 2))
    return ChannelEstimate(h, n_fft, mse)
