"""Pulse-shaped multicarrier random access: Gabor tools, pulses, ICI bounds,
a physical-layer chain and simulation drivers."""

from .gabor import (
    GaborSystem,
    Lattice,
    SampledSignal,
    TFOffset,
    bessel_bound,
    biorthogonality_residual,
    cp_ofdm_ambiguity,
    cross_ambiguity,
    dual_pulse,
    frame_bounds,
    gram_matrix,
    tf_shift,
)
from .pulses import PulsePair, SplineParams, rect_pair, spline_pair, spline_time_pulse

__version__ = "0.1.0"

__all__ = [
    "GaborSystem",
    "Lattice",
    "PulsePair",
    "SampledSignal",
    "SplineParams",
    "TFOffset",
    "bessel_bound",
    "biorthogonality_residual",
    "cp_ofdm_ambiguity",
    "cross_ambiguity",
    "dual_pulse",
    "frame_bounds",
    "gram_matrix",
    "rect_pair",
    "spline_pair",
    "spline_time_pulse",
    "tf_shift",
]
