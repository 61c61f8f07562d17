"""Zadoff-Chu random-access preambles and the signature mapping."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ParameterError

__all__ = [
    "zc_root",
    "PreambleConfig",
    "signature_to_preamble",
    "preamble_coefficients",
    "preamble_spectrum",
]

N_SIGNATURES = 64


def zc_root(u: int, n_zc: int) -> np.ndarray:
    """Zadoff-Chu root sequence ``exp(-i pi u m (m + 1) / n_zc)``."""
    if n_zc < 2 or n_zc % 2 == 0:
        raise ParameterError("n_zc must be odd and at least 3")
    if math.gcd(u, n_zc) != 1:
        raise ParameterError(f"root {u} is not coprime to {n_zc}")
    m = np.arange(n_zc)
    # Reduce the quadratic phase modulo 2*n_zc before scaling to keep precision.
    return np.exp(-1j * np.pi * ((u * m * (m + 1)) % (2 * n_zc)) / n_zc)


def preamble_spectrum(x: np.ndarray) -> np.ndarray:
    """Unitary subcarrier coefficients ``X[w] = n^-1/2 sum_m x[m] exp(+i 2 pi w m / n)``.

    With this sign convention a delay of ``D`` receive samples advances the
    sequence by ``D n_zc / n_fft`` positions, so the correlation peak of a
    cyclic shift ``v`` appears at lag ``v n_cs + D n_zc / n_fft``.
    """
    x = np.asarray(x)
    return np.sqrt(x.size) * np.fft.ifft(x)


@dataclass(frozen=True)
class PreambleConfig:
    """Signature-set parameters.

    Attributes
    ----------
    n_zc : int
        Sequence length (an odd prime).
    n_cs : int
        Cyclic-shift spacing; ``V = n_zc // n_cs`` shifts fit one root.
    n_cf : int
        Signatures reserved for contention-free access; the usable
        signatures are ``0 .. 63 - n_cf``.
    roots : tuple of int, optional
        Root indices in use. Defaults to the smallest roots coprime to
        ``n_zc`` in ascending order.
    """

    n_zc: int = 839
    n_cs: int = 13
    n_cf: int = 0
    roots: tuple = field(default=None)

    def __post_init__(self):
        if self.n_zc < 3 or self.n_zc % 2 == 0:
            raise ParameterError("n_zc must be odd and at least 3")
        if not 1 <= self.n_cs <= self.n_zc:
            raise ParameterError("n_cs must lie in [1, n_zc]")
        if not 0 <= self.n_cf < N_SIGNATURES:
            raise ParameterError("n_cf must lie in [0, 64)")
        if self.roots is None:
            roots, u = [], 1
            while len(roots) < self.n_root:
                if math.gcd(u, self.n_zc) == 1:
                    roots.append(u)
                u += 1
            object.__setattr__(self, "roots", tuple(roots))
        else:
            roots = tuple(int(r) for r in self.roots)
            if len(roots) < self.n_root:
                raise ParameterError(f"need at least {self.n_root} roots")
            for r in roots:
                if math.gcd(r, self.n_zc) != 1:
                    raise ParameterError(f"root {r} is not coprime to {self.n_zc}")
            object.__setattr__(self, "roots", roots)

    @property
    def n_shifts(self) -> int:
        """Cyclic shifts per root ``V``."""
        return self.n_zc // self.n_cs

    @property
    def n_signatures(self) -> int:
        return N_SIGNATURES - self.n_cf

    @property
    def n_root(self) -> int:
        """Roots needed to cover all signatures (ceiling division)."""
        return -(-self.n_signatures // self.n_shifts)

    def split(self, signature: int) -> tuple[int, int]:
        """Map a signature to ``(root position, cyclic shift index)``."""
        if not 0 <= signature < self.n_signatures:
            raise ParameterError(f"signature must lie in [0, {self.n_signatures})")
        return divmod(signature, self.n_shifts)


def signature_to_preamble(signature: int, cfg: PreambleConfig) -> np.ndarray:
    """Time-domain preamble ``x_{u,v}[m] = x_u[(m + v n_cs) mod n_zc]``."""
    r, v = cfg.split(signature)
    return np.roll(zc_root(cfg.roots[r], cfg.n_zc), -v * cfg.n_cs)


def preamble_coefficients(signature: int, cfg: PreambleConfig) -> np.ndarray:
    """Subcarrier coefficients of a signature's preamble (unit modulus)."""
    return preamble_spectrum(signature_to_preamble(signature, cfg))
