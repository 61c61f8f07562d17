"""Pulse families: B-spline pulses, the cyclic-prefix rectangle pair, and
frame-region classification for the second-order spline prototype."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PreconditionError
from .gabor import (
    Lattice,
    SampledSignal,
    as_int_samples,
    dual_pulse,
    frame_bounds,
)

__all__ = [
    "SplineParams",
    "PulsePair",
    "FrameRegion",
    "b2_frequency_prototype",
    "b2_sampled",
    "spline_time_pulse",
    "spline_pair",
    "rect_pair",
    "classify_frame_region",
    "bessel_vs_alpha",
]


@dataclass(frozen=True)
class SplineParams:
    """Parameters of the time pulse ``sinc^2(alpha * B * t)``.

    Parameters
    ----------
    bandwidth : float
        Subcarrier spacing ``B`` in Hz; the spectrum is a triangle of
        half-width ``alpha * B``.
    alpha : float
        Dilation factor, positive.
    c, d : float, optional
        Truncation window ``[c, d)`` in seconds relative to the pulse center.
        Defaults to the whole frame.
    """

    bandwidth: float
    alpha: float = 1.0
    c: float | None = None
    d: float | None = None

    def __post_init__(self):
        if not (self.bandwidth > 0 and self.alpha > 0):
            raise DomainError("bandwidth and alpha must be positive")
        if self.c is not None and self.d is not None and not self.c < self.d:
            raise DomainError("truncation window needs c < d")


@dataclass(frozen=True, eq=False)
class PulsePair:
    """Transmit and receive pulses on a common lattice.

    Attributes
    ----------
    tx, rx : SampledSignal
        Transmit pulse (unit energy) and receive pulse on the same grid.
    lattice : Lattice
        Signaling lattice.
    kind : str
        ``"cp-ofdm"`` or ``"bfdm-spline"``.
    energy : float
        Energy captured by the receive family, ``E_g`` in the ICI bounds.
    bessel : float
        Bessel bound of the receive family, ``B_g`` in the ICI bounds.
    """

    tx: SampledSignal
    rx: SampledSignal
    lattice: Lattice
    kind: str
    energy: float
    bessel: float

    @property
    def gain(self) -> complex:
        """``<rx, tx>``; equals 1 for a biorthogonal pair."""
        return complex(np.vdot(self.rx.samples, self.tx.samples))

    def matched_rx(self) -> SampledSignal:
        """Receive pulse rescaled so that ``<rx, tx> = 1``."""
        return self.rx.scaled(1.0 / np.conj(self.gain))


def b2_frequency_prototype(f):
    """Second-order B-spline ``max(0, 1 - |f|)`` (a unit triangle)."""
    f = np.asarray(f, dtype=float)
    out = np.maximum(0.0, 1.0 - np.abs(f))
    return out if out.ndim else float(out)


def b2_sampled(step: float, frame_len: int) -> SampledSignal:
    """Triangle prototype sampled at ``step`` on a centered periodized frame."""
    if frame_len < 2 or not step > 0:
        raise PreconditionError("need frame_len >= 2 and step > 0")
    origin = frame_len // 2
    x = (np.arange(frame_len) - origin) * step
    return SampledSignal(b2_frequency_prototype(x), step, origin)


def spline_time_pulse(
    params: SplineParams, ts: float, frame_len: int, normalize: bool = True
) -> SampledSignal:
    """Sample ``sinc^2(alpha B t)`` (``sinc(x) = sin(pi x)/(pi x)``).

    The pulse is centered at index ``frame_len // 2`` and truncated to the
    window ``[c, d)``. With ``normalize`` it has unit energy.
    """
    if frame_len < 1 or not ts > 0:
        raise PreconditionError("frame_len and ts must be positive")
    origin = frame_len // 2
    t = (np.arange(frame_len) - origin) * ts
    c = t[0] if params.c is None else params.c
    d = t[-1] + ts if params.d is None else params.d
    if c < t[0] - 1e-9 * ts or d > t[-1] + ts * (1 + 1e-9):
        raise PreconditionError(
            f"frame of {frame_len} samples cannot hold window [{c}, {d})"
        )
    g = np.sinc(params.alpha * params.bandwidth * t) ** 2
    g = np.where((t >= c - 1e-12 * ts) & (t < d - 1e-12 * ts), g, 0.0)
    if normalize:
        g = g / np.linalg.norm(g)
    return SampledSignal(g, ts, origin)


def spline_pair(
    alpha: float, lattice: Lattice, ts: float, frame_len: int, method: str = "block"
) -> PulsePair:
    """Unit-energy spline transmit pulse and its dual receive pulse."""
    tx = spline_time_pulse(SplineParams(lattice.f_step, alpha), ts, frame_len)
    rx = dual_pulse(tx, lattice, method=method)
    _, bessel = frame_bounds(rx, lattice)
    return PulsePair(tx, rx, lattice, "bfdm-spline", energy=1.0, bessel=bessel)


def rect_pair(T_u: float, T_cp: float, ts: float, n_symbols: int = 3) -> PulsePair:
    """Cyclic-prefix OFDM pulses on ``Lambda = diag(T_u + T_cp, 1/T_u)``.

    The transmit pulse is ``chi[-T_cp, T_u) / sqrt(T_u + T_cp)`` and the
    receive pulse ``chi[0, T_u) / sqrt(T_u)``. The frame holds ``n_symbols``
    symbol periods with the origin in the middle one, so shifts by less than
    one symbol period never wrap. ``<rx, tx> = sqrt(T_u / (T_u + T_cp))``.
    """
    if n_symbols < 1:
        raise PreconditionError("n_symbols must be positive")
    n_u = as_int_samples(T_u / ts, "T_u")
    n_cp = as_int_samples(T_cp / ts, "T_cp")
    if n_u <= 0 or n_cp < 0:
        raise PreconditionError("T_u must be positive and T_cp non-negative")
    period = n_u + n_cp
    L = n_symbols * period
    origin = (n_symbols // 2) * period + n_cp
    tx = np.zeros(L)
    tx[origin - n_cp : origin + n_u] = 1.0 / math.sqrt(period)
    rx = np.zeros(L)
    rx[origin : origin + n_u] = 1.0 / math.sqrt(n_u)
    lattice = Lattice(period * ts, 1.0 / (n_u * ts))
    return PulsePair(
        SampledSignal(tx, ts, origin),
        SampledSignal(rx, ts, origin),
        lattice,
        "cp-ofdm",
        energy=n_u / period,
        bessel=1.0,
    )


class FrameRegion(enum.Enum):
    FRAME = "frame"
    NOT_FRAME = "not-frame"
    INDETERMINATE = "indeterminate"


def classify_frame_region(a: float, b: float) -> FrameRegion:
    """Known frame-set membership of the triangle prototype on ``diag(a, b)``."""
    if not (a > 0 and b > 0):
        raise DomainError("lattice parameters must be positive")
    if a >= 2 or (b > 1 and float(b).is_integer()):
        return FrameRegion.NOT_FRAME
    if b <= 0.5 or (1.1 <= a <= 1.9 and b <= 1.0 / a):
        return FrameRegion.FRAME
    return FrameRegion.INDETERMINATE


def bessel_vs_alpha(
    alphas, lattice: Lattice, ts: float, frame_len: int, amplitude: float = 1.0
) -> list[tuple[float, float]]:
    """Upper frame bound of the spline family for each dilation ``alpha``.

    Returns ``(alpha, B)`` pairs in ascending ``alpha`` order.
    """
    out = []
    for alpha in sorted(float(a) for a in alphas):
        g = spline_time_pulse(SplineParams(lattice.f_step, alpha), ts, frame_len)
        _, B = frame_bounds(g.scaled(amplitude), lattice)
        out.append((alpha, B))
    return out
