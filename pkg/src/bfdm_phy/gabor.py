"""Discrete Gabor analysis on a periodized, uniformly sampled signal space.

Signals are complex vectors of length ``L`` sampled at interval ``ts`` with a
designated time origin. Time shifts act circularly, so a lattice whose hop
divides ``L`` defines a finite Gabor system. Inner products are plain sums
``<x, y> = sum(conj(x) * y)`` without a ``ts`` factor, which makes unit-norm
vectors the natural normalization.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .errors import (
    DimensionError,
    IllConditionedError,
    NumericalError,
    PreconditionError,
)

__all__ = [
    "SampledSignal",
    "TFOffset",
    "Lattice",
    "GaborSystem",
    "tf_shift",
    "cross_ambiguity",
    "gram_matrix",
    "bessel_bound",
    "frame_bounds",
    "dual_pulse",
    "biorthogonality_residual",
    "cp_ofdm_ambiguity",
]

_INT_TOL = 1e-6
# Largest number of complex entries materialized at once by block routines.
_CHUNK_ELEMS = 2**22


def as_int_samples(value: float, what: str) -> int:
    """Round ``value`` to an integer, raising if it is not (nearly) integral."""
    r = round(value)
    if abs(value - r) > _INT_TOL * max(1.0, abs(value)):
        raise PreconditionError(f"{what} = {value!r} is not an integer number of samples")
    return int(r)


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """A finite complex sequence with sampling interval and time origin.

    Parameters
    ----------
    samples : array_like
        Complex samples, length ``L``.
    ts : float
        Sampling interval in seconds.
    origin_index : int
        Array index that corresponds to ``t = 0``.
    """

    samples: np.ndarray
    ts: float
    origin_index: int = 0

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=complex)
        if x.ndim != 1 or x.size == 0:
            raise DimensionError("samples must be a non-empty 1-D array")
        if not (np.isfinite(self.ts) and self.ts > 0):
            raise PreconditionError(f"ts must be positive, got {self.ts!r}")
        if not 0 <= self.origin_index < x.size:
            raise DimensionError("origin_index must index into samples")
        if not np.all(np.isfinite(x)):
            raise PreconditionError("samples must be finite")
        object.__setattr__(self, "samples", x)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def times(self) -> np.ndarray:
        """Sample times in seconds relative to the origin."""
        return (np.arange(len(self)) - self.origin_index) * self.ts

    def norm(self) -> float:
        return float(np.linalg.norm(self.samples))

    def with_samples(self, samples) -> "SampledSignal":
        """Return a signal on the same grid with new samples."""
        return SampledSignal(samples, self.ts, self.origin_index)

    def scaled(self, factor: complex) -> "SampledSignal":
        return self.with_samples(self.samples * factor)

    def to_csv(self, path) -> None:
        """Write ``(index, re, im)`` rows with ``index`` relative to the origin."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "re", "im"])
            for n, v in zip(range(-self.origin_index, len(self) - self.origin_index), self.samples):
                w.writerow([n, repr(float(v.real)), repr(float(v.imag))])

    @classmethod
    def from_csv(cls, path, ts: float) -> "SampledSignal":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        idx = data[:, 0].astype(int)
        if np.any(np.diff(idx) != 1):
            raise DimensionError("pulse CSV indices must be consecutive")
        return cls(data[:, 1] + 1j * data[:, 2], ts, int(-idx[0]))


@dataclass(frozen=True)
class TFOffset:
    """A time-frequency displacement ``(nu1 [s], nu2 [Hz])``."""

    nu1: float = 0.0
    nu2: float = 0.0

    def __add__(self, other: "TFOffset") -> "TFOffset":
        return TFOffset(self.nu1 + other.nu1, self.nu2 + other.nu2)

    def __neg__(self) -> "TFOffset":
        return TFOffset(-self.nu1, -self.nu2)


@dataclass(frozen=True)
class Lattice:
    """Separable lattice ``diag(T, F)`` of time step ``T`` and frequency step ``F``."""

    t_step: float
    f_step: float

    def __post_init__(self):
        if not (self.t_step > 0 and self.f_step > 0):
            raise PreconditionError("lattice steps must be positive")

    @property
    def tf_product(self) -> float:
        return self.t_step * self.f_step

    def adjoint(self) -> "Lattice":
        """The adjoint lattice ``diag(1/F, 1/T)``."""
        return Lattice(1.0 / self.f_step, 1.0 / self.t_step)

    def hop(self, ts: float) -> int:
        """Time step in samples."""
        return as_int_samples(self.t_step / ts, "lattice time step")

    def channels(self, ts: float) -> int:
        """Number of frequency channels ``1 / (F ts)``."""
        return as_int_samples(1.0 / (self.f_step * ts), "1/(F*ts)")

    def point(self, n1: int, n2: int) -> TFOffset:
        return TFOffset(n1 * self.t_step, n2 * self.f_step)


def tf_shift(x: SampledSignal, mu: TFOffset) -> SampledSignal:
    """Apply ``S_mu x(t) = exp(i 2 pi nu2 t) x(t - nu1)`` with a circular delay.

    The delay must be an integer number of samples; negative delays are
    circular early shifts.
    """
    s = as_int_samples(mu.nu1 / x.ts, "time shift")
    out = np.roll(x.samples, s)
    if mu.nu2 != 0.0:
        out = out * np.exp(2j * np.pi * mu.nu2 * x.times)
    return x.with_samples(out)


def _check_same_grid(a: SampledSignal, b: SampledSignal) -> None:
    if len(a) != len(b) or not math.isclose(a.ts, b.ts, rel_tol=1e-12):
        raise DimensionError("signals must share length and sampling interval")
    if a.origin_index != b.origin_index:
        raise DimensionError("signals must share the time origin")


def cross_ambiguity(g: SampledSignal, gamma: SampledSignal, mu: TFOffset) -> complex:
    """Cross-ambiguity ``A_{g,gamma}(mu) = <g, S_mu gamma>`` (``g`` conjugated)."""
    _check_same_grid(g, gamma)
    return complex(np.vdot(g.samples, tf_shift(gamma, mu).samples))


@dataclass(frozen=True, eq=False)
class GaborSystem:
    """Atoms ``S_{Lambda n} gamma`` for ``n`` in a finite index set.

    ``index_set`` is an integer array of shape ``(|I|, 2)`` with rows
    ``(n1, n2)``. Modulation uses time relative to the prototype origin.
    """

    prototype: SampledSignal
    lattice: Lattice
    index_set: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.index_set, dtype=int).reshape(-1, 2)
        if idx.shape[0] == 0:
            raise PreconditionError("index set must be non-empty")
        self.lattice.hop(self.prototype.ts)
        object.__setattr__(self, "index_set", idx)

    @classmethod
    def full(cls, prototype: SampledSignal, lattice: Lattice) -> "GaborSystem":
        """All lattice points of the periodized frame."""
        a, M = _hop_and_channels(prototype, lattice)
        K = len(prototype) // a
        n1, n2 = np.meshgrid(np.arange(K), np.arange(M), indexing="ij")
        return cls(prototype, lattice, np.column_stack([n1.ravel(), n2.ravel()]))

    def __len__(self) -> int:
        return self.index_set.shape[0]

    def atoms(self) -> np.ndarray:
        """Matrix whose rows are the atoms."""
        p = self.prototype
        a = self.lattice.hop(p.ts)
        t = p.times
        rows = np.empty((len(self), len(p)), dtype=complex)
        for i, (n1, n2) in enumerate(self.index_set):
            rows[i] = np.roll(p.samples, n1 * a) * np.exp(2j * np.pi * n2 * self.lattice.f_step * t)
        return rows


def gram_matrix(system: GaborSystem) -> np.ndarray:
    """Gram matrix ``G[m, n] = <gamma_m, gamma_n>``."""
    A = system.atoms()
    return A.conj() @ A.T


def bessel_bound(system: GaborSystem, tol: float = 1e-8) -> float:
    """Largest eigenvalue of the Gram matrix of ``system``.

    Small systems use a dense Hermitian eigensolver. Larger ones use Lanczos
    iteration with at most ``10 |I|`` iterations.

    Raises
    ------
    NumericalError
        If the Lanczos iteration does not converge.
    """
    n = len(system)
    A = system.atoms()
    if n <= 256:
        G = A.conj() @ A.T
        return float(np.linalg.eigvalsh(G)[-1])
    op = LinearOperator((n, n), matvec=lambda v: A.conj() @ (A.T @ v), dtype=complex)
    maxiter = 10 * n
    try:
        val = eigsh(op, k=1, which="LA", tol=tol, maxiter=maxiter, return_eigenvectors=False)
    except ArpackNoConvergence as exc:
        raise NumericalError(f"Bessel bound did not converge after {maxiter} iterations") from exc
    return float(val[0])


def _hop_and_channels(prototype: SampledSignal, lattice: Lattice) -> tuple[int, int]:
    a = lattice.hop(prototype.ts)
    M = lattice.channels(prototype.ts)
    L = len(prototype)
    if L % a or L % M:
        raise PreconditionError(
            f"frame length {L} must be divisible by hop {a} and channel count {M}"
        )
    return a, M


def _walnut_blocks(g: np.ndarray, a: int, M: int, residues: np.ndarray) -> np.ndarray:
    """Diagonal blocks of the frame operator for the given residues mod ``M``.

    The frame operator only couples samples congruent mod ``M``; block ``r``
    is ``M * sum_k g[r + pM - ka] conj(g[r + qM - ka])``.
    """
    L = g.size
    Q, K = L // M, L // a
    r = residues[:, None, None]
    p = np.arange(Q)[None, :, None]
    k = np.arange(K)[None, None, :]
    G = g[(r + p * M - k * a) % L]
    return M * np.einsum("rpk,rqk->rpq", G, G.conj())


def _block_chunks(L: int, a: int, M: int):
    Q, K = L // M, L // a
    step = max(1, _CHUNK_ELEMS // max(1, Q * max(Q, K)))
    for start in range(0, M, step):
        yield np.arange(start, min(M, start + step))


def _circular_support(g: np.ndarray) -> tuple[int, int]:
    """Start and length of the shortest circular arc holding all nonzero samples."""
    nz = np.flatnonzero(g)
    if nz.size == 0:
        return 0, 0
    gaps = np.diff(np.concatenate([nz, [nz[0] + g.size]]))
    i = int(np.argmax(gaps))
    return int(nz[(i + 1) % nz.size]), int(g.size - gaps[i] + 1)


def frame_bounds(prototype: SampledSignal, lattice: Lattice) -> tuple[float, float]:
    """Optimal frame bounds ``(A, B)`` of the full periodized Gabor system.

    Computed exactly from the eigenvalues of the block-diagonal form of the
    frame operator. ``A`` is zero when the system is not a frame.
    Prototypes supported on at most one hop take a closed-form path that
    only needs the frame length to be a multiple of the hop.
    """
    g = prototype.samples
    a = lattice.hop(prototype.ts)
    M = lattice.channels(prototype.ts)
    start, length = _circular_support(g)
    if length <= a and g.size % a == 0:
        w = np.abs(np.roll(g, -start)) ** 2
        if length <= M:
            # Painless case: the frame operator is diagonal.
            d = M * np.roll(w, start).reshape(-1, a).sum(axis=0)
            return float(d.min()), float(d.max())
        # Disjoint translates: circulant Gram blocks with eigenvalues M * fold(|g|^2).
        w = np.concatenate([w[:length], np.zeros((-length) % M)])
        return 0.0, float(M * w.reshape(-1, M).sum(axis=0).max())
    a, M = _hop_and_channels(prototype, lattice)
    lo, hi = np.inf, 0.0
    for res in _block_chunks(g.size, a, M):
        ev = np.linalg.eigvalsh(_walnut_blocks(g, a, M, res))
        lo = min(lo, float(ev[:, 0].min()))
        hi = max(hi, float(ev[:, -1].max()))
    return max(lo, 0.0), hi


def _frame_operator_apply(g: np.ndarray, a: int, M: int, f: np.ndarray) -> np.ndarray:
    """Matrix-free ``S f = sum_{k,l} <f, g_{k,l}> g_{k,l}``."""
    L = g.size
    out = np.zeros(L, dtype=complex)
    for k in range(L // a):
        gk = np.roll(g, k * a)
        fold = (gk.conj() * f).reshape(-1, M).sum(axis=0)
        out += M * gk * np.tile(fold, L // M)
    return out


def _conjugate_gradient(apply, b: np.ndarray, rtol: float, maxiter: int) -> np.ndarray:
    x = np.zeros_like(b)
    r = b.copy()
    p = r.copy()
    rs = np.vdot(r, r).real
    target = (rtol * np.linalg.norm(b)) ** 2
    for _ in range(maxiter):
        if rs <= target:
            return x
        Ap = apply(p)
        step = rs / np.vdot(p, Ap).real
        x += step * p
        r -= step * Ap
        rs_new = np.vdot(r, r).real
        p = r + (rs_new / rs) * p
        rs = rs_new
    if rs <= target:
        return x
    raise NumericalError(f"conjugate gradient did not reach rtol={rtol} in {maxiter} iterations")


def dual_pulse(
    prototype: SampledSignal,
    lattice: Lattice,
    method: str = "block",
    max_condition: float = 1e6,
) -> SampledSignal:
    """Dual pulse biorthogonal to ``prototype`` on ``lattice``.

    The dual is ``S_adj^{-1} g`` where ``S_adj`` is the frame operator of the
    prototype on the adjoint lattice, scaled so that ``<g, gamma> = 1``.

    Parameters
    ----------
    method : {"block", "cg"}
        ``"block"`` solves each diagonal block directly; ``"cg"`` runs
        matrix-free conjugate gradients to a relative residual of 1e-12.
    max_condition : float
        Largest accepted ratio of adjoint frame bounds.

    Raises
    ------
    IllConditionedError
        If the adjoint system is not a Riesz basis with bounds ratio below
        ``max_condition``.
    """
    adj = lattice.adjoint()
    a2, M2 = _hop_and_channels(prototype, adj)
    g = prototype.samples
    L = g.size
    A, B = frame_bounds(prototype, adj)
    if not A > B / max_condition:
        cond = B / A if A > 0 else float("inf")
        raise IllConditionedError(
            f"adjoint frame bounds ({A:.3g}, {B:.3g}) give condition {cond:.3g}", cond
        )
    if method == "block":
        Q = L // M2
        x = np.empty((M2, Q), dtype=complex)
        gv = g.reshape(Q, M2).T
        for res in _block_chunks(L, a2, M2):
            blocks = _walnut_blocks(g, a2, M2, res)
            x[res] = np.linalg.solve(blocks, gv[res][..., None])[..., 0]
        gam = x.T.reshape(L)
    elif method == "cg":
        gam = _conjugate_gradient(
            lambda v: _frame_operator_apply(g, a2, M2, v), g.astype(complex), 1e-12, 10 * L
        )
    else:
        raise PreconditionError(f"unknown method {method!r}")
    gam = gam / np.vdot(g, gam)
    return prototype.with_samples(gam)


def biorthogonality_residual(
    g: SampledSignal, gamma: SampledSignal, lattice: Lattice
) -> float:
    """Largest ``|<gamma_m, g_n> - delta_{mn}|`` over the periodized lattice.

    By lattice covariance it suffices to test ``<gamma_m, g>`` for all ``m``.
    """
    _check_same_grid(g, gamma)
    a, M = _hop_and_channels(g, lattice)
    L = len(g)
    worst = 0.0
    for k in range(L // a):
        w = np.roll(gamma.samples, k * a).conj() * g.samples
        c = np.fft.fft(w.reshape(-1, M).sum(axis=0))
        if k == 0:
            c[0] -= 1.0
        worst = max(worst, float(np.abs(c).max()))
    return worst


def cp_ofdm_ambiguity(nu: TFOffset, T_u: float, T_cp: float, ts: float | None = None) -> complex:
    """Closed-form cross-ambiguity of the unit-norm cyclic-prefix OFDM pair.

    The transmit pulse is a rectangle on ``[-T_cp, T_u)`` and the receive
    pulse a rectangle on ``[0, T_u)``, both of unit energy. The time shift is
    first mapped by the prefix rule (zero inside ``[0, T_cp]``, reduced by
    ``T_cp`` above it), so ``|A(0)| = sqrt(T_u / (T_u + T_cp))``.

    If ``ts`` is given, the sampled (Dirichlet-kernel) form is returned,
    which matches a direct inner product of sampled rectangles exactly.
    """
    if not (T_u > 0 and T_cp >= 0):
        raise PreconditionError("T_u must be positive and T_cp non-negative")
    tau, f = nu.nu1, nu.nu2
    start = max(0.0, tau - T_cp)
    end = min(T_u, tau + T_u)
    length = end - start
    if length <= 0:
        return 0j
    if ts is None:
        mag = length if f == 0 else math.sin(math.pi * f * length) / (math.pi * f)
        phase = math.pi * f * (2 * start + length)
        return complex(math.sqrt(T_u / (T_u + T_cp)) / T_u * mag * np.exp(1j * phase))
    n_u = as_int_samples(T_u / ts, "T_u")
    n_cp = as_int_samples(T_cp / ts, "T_cp")
    n_len = as_int_samples(length / ts, "overlap")
    n_start = as_int_samples(start / ts, "overlap start")
    x = math.pi * f * ts
    mag = n_len if math.sin(x) == 0 else math.sin(n_len * x) / math.sin(x)
    phase = 2 * x * (n_start + (n_len - 1) / 2)
    return complex(mag * np.exp(1j * phase) / math.sqrt(n_u * (n_u + n_cp)))
