"""Physical-layer building blocks for random access and uplink data."""

from .detection import DetectionResult, detect_signature, detect_signatures, power_delay_profiles
from .estimation import ChannelEstimate, estimate_channel, tikhonov_weight
from .modem import (
    FrameLayout,
    bfdm_demodulate,
    bfdm_modulate,
    calibrate_beta,
    ofdm_prach_demodulate,
    ofdm_prach_modulate,
)
from .preamble import (
    PreambleConfig,
    preamble_coefficients,
    preamble_spectrum,
    signature_to_preamble,
    zc_root,
)
from .pusch import PuschConfig, pusch_demodulate, pusch_modulate

__all__ = [
    "ChannelEstimate",
    "DetectionResult",
    "FrameLayout",
    "PreambleConfig",
    "PuschConfig",
    "bfdm_demodulate",
    "bfdm_modulate",
    "calibrate_beta",
    "detect_signature",
    "detect_signatures",
    "estimate_channel",
    "ofdm_prach_demodulate",
    "ofdm_prach_modulate",
    "power_delay_profiles",
    "preamble_coefficients",
    "preamble_spectrum",
    "pusch_demodulate",
    "pusch_modulate",
    "signature_to_preamble",
    "tikhonov_weight",
    "zc_root",
]
