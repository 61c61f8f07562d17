"""Unit-power symbol alphabets and hard decisions."""

from __future__ import annotations

import numpy as np

from ..errors import PreconditionError

_QPSK = np.array([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]) / np.sqrt(2)


def constellation(name: str) -> np.ndarray:
    if name in ("4qam", "qpsk"):
        return _QPSK
    if name == "bpsk":
        return np.array([1.0 + 0j, -1.0 + 0j])
    if name == "16qam":
        lv = np.array([-3, -1, 1, 3])
        pts = (lv[:, None] + 1j * lv[None, :]).ravel()
        return pts / np.sqrt(10)
    raise PreconditionError(f"unknown modulation {name!r}")


def random_symbols(rng: np.random.Generator, shape, name: str = "4qam") -> tuple[np.ndarray, np.ndarray]:
    """Draw uniform symbol indices and return ``(indices, symbols)``."""
    pts = constellation(name)
    idx = rng.integers(0, pts.size, size=shape)
    return idx, pts[idx]


def hard_decision(y: np.ndarray, name: str = "4qam") -> np.ndarray:
    """Index of the nearest constellation point for each sample."""
    pts = constellation(name)
    y = np.asarray(y)
    return np.abs(y[..., None] - pts).argmin(axis=-1)
