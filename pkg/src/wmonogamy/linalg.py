"""Dense complex linear algebra for small multi-qubit systems.

Index convention used everywhere in this package: qubit 1 is the most
significant bit of a computational basis index, so the basis label
|q1 q2 ... qn> maps to the integer q1*2^(n-1) + q2*2^(n-2) + ... + qn.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "PureState",
    "DensityMatrix",
    "Spectrum",
    "ket_from_amplitudes",
    "density_of",
    "partial_trace",
    "hermitian_eig",
    "psd_sqrt",
    "purity",
    "pure_state_marginal",
]

NORM_ATOL = 1e-12
HERM_ATOL = 1e-10
PSD_EIG_FLOOR = -1e-10
SYMMETRIZE_ATOL = 1e-8
SQRT_CLAMP_FLOOR = -1e-8
RECONSTRUCT_ATOL = 1e-9


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PureState:
    """Normalized complex state vector over ``n`` qubits.

    ``normalization`` records the multiplicative factor that was applied to
    the raw input amplitudes (1.0 when the input was already normalized).
    """

    n: int
    amplitudes: np.ndarray
    normalization: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one qubit, got n={self.n}")
        amps = np.array(self.amplitudes, dtype=np.complex128).ravel()
        if amps.size != 2**self.n:
            raise ValueError(
                f"amplitude vector has length {amps.size}, expected {2**self.n}"
            )
        norm_sq = float(np.sum(np.abs(amps) ** 2))
        if abs(norm_sq - 1.0) > NORM_ATOL:
            raise ValueError(f"state not normalized: sum |amp|^2 = {norm_sq!r}")
        object.__setattr__(self, "amplitudes", _freeze(amps))

    @property
    def dim(self) -> int:
        return 2**self.n


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, PSD, unit-trace matrix over an ordered set of qubit labels."""

    qubits: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        qubits = tuple(int(q) for q in self.qubits)
        if len(qubits) == 0 or len(set(qubits)) != len(qubits):
            raise ValueError(f"qubit labels must be non-empty and unique: {qubits}")
        m = np.array(self.matrix, dtype=np.complex128)
        d = 2 ** len(qubits)
        if m.shape != (d, d):
            raise ValueError(f"matrix shape {m.shape} does not match {len(qubits)} qubits")
        if np.max(np.abs(m - m.conj().T)) > HERM_ATOL:
            raise ValueError("matrix is not Hermitian within 1e-10")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > HERM_ATOL:
            raise ValueError(f"trace is {tr!r}, expected 1")
        if float(np.linalg.eigvalsh((m + m.conj().T) / 2).min()) < PSD_EIG_FLOOR:
            raise ValueError("matrix has an eigenvalue below -1e-10, not PSD")
        object.__setattr__(self, "qubits", qubits)
        object.__setattr__(self, "matrix", _freeze(m))

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    @property
    def dim(self) -> int:
        return 2 ** len(self.qubits)


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition with eigenvalues sorted in descending order."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        w = np.array(self.eigenvalues, dtype=np.float64)
        u = np.array(self.eigenvectors, dtype=np.complex128)
        if np.any(np.diff(w) > 0):
            raise ValueError("eigenvalues must be non-increasing")
        object.__setattr__(self, "eigenvalues", _freeze(w))
        object.__setattr__(self, "eigenvectors", _freeze(u))


def ket_from_amplitudes(amps: Iterable[complex]) -> PureState:
    """Build a normalized :class:`PureState` from raw amplitudes.

    The input length must be a power of two (>= 2) and the vector must be
    nonzero; the applied normalization factor is recorded on the result.
    """
    arr = np.asarray(list(amps) if not isinstance(amps, np.ndarray) else amps,
                     dtype=np.complex128).ravel()
    size = arr.size
    if size < 2 or (size & (size - 1)) != 0:
        raise ValueError(f"amplitude count {size} is not a power of two >= 2")
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        raise ValueError("cannot normalize the zero vector")
    n = size.bit_length() - 1
    return PureState(n=n, amplitudes=arr / norm, normalization=1.0 / norm)


def density_of(state: PureState) -> DensityMatrix:
    """Rank-1 projector |psi><psi| on qubits 1..n."""
    rho = np.outer(state.amplitudes, state.amplitudes.conj())
    return DensityMatrix(qubits=tuple(range(1, state.n + 1)), matrix=rho)


def _scatter_indices(positions: Sequence[int], nq: int) -> np.ndarray:
    """Base indices for all bit patterns over ``positions`` (0 = MSB)."""
    npos = len(positions)
    vals = np.arange(2**npos, dtype=np.intp)
    base = np.zeros(2**npos, dtype=np.intp)
    for m, p in enumerate(positions):
        bit = (vals >> (npos - 1 - m)) & 1
        base += bit << (nq - 1 - p)
    return base


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Trace out every qubit of ``rho`` not listed in ``keep``.

    The kept qubits stay in their original relative order.  Computed by
    index arithmetic over bit masks, without permutation matrices.
    """
    keep_set = set(int(q) for q in keep)
    if not keep_set:
        raise ValueError("keep set must be non-empty")
    unknown = keep_set - set(rho.qubits)
    if unknown:
        raise ValueError(f"unknown qubit labels {sorted(unknown)}; have {rho.qubits}")
    nq = rho.n_qubits
    keep_pos = [p for p, q in enumerate(rho.qubits) if q in keep_set]
    trace_pos = [p for p in range(nq) if p not in keep_pos]
    if not trace_pos:
        return DensityMatrix(qubits=rho.qubits, matrix=rho.matrix)

    kb = _scatter_indices(keep_pos, nq)
    tb = _scatter_indices(trace_pos, nq)
    m = rho.matrix
    dk, dt = kb.size, tb.size
    if dk * dk * dt <= 1 << 24:
        idx = kb[:, None] + tb[None, :]
        out = m[idx[:, None, :], idx[None, :, :]].sum(axis=-1)
    else:
        out = np.zeros((dk, dk), dtype=np.complex128)
        for t in tb:
            out += m[np.ix_(kb + t, kb + t)]
    kept_labels = tuple(rho.qubits[p] for p in keep_pos)
    return DensityMatrix(qubits=kept_labels, matrix=out)


def hermitian_eig(mat) -> Spectrum:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    The input is symmetrized as (M + M†)/2 first; inputs farther than 1e-8
    from Hermitian are rejected.
    """
    m = mat.matrix if isinstance(mat, DensityMatrix) else np.asarray(mat, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if np.max(np.abs(m - m.conj().T)) > SYMMETRIZE_ATOL:
        raise ValueError("matrix is not Hermitian within 1e-8")
    h = (m + m.conj().T) / 2
    w, u = np.linalg.eigh(h)
    w, u = w[::-1].copy(), u[:, ::-1].copy()
    recon = (u * w) @ u.conj().T
    if np.max(np.abs(recon - h)) > RECONSTRUCT_ATOL:
        raise np.linalg.LinAlgError("eigendecomposition failed to reconstruct input")
    return Spectrum(eigenvalues=w, eigenvectors=u)


def psd_sqrt(mat) -> np.ndarray:
    """Principal square root of a PSD matrix.

    Eigenvalues in [-1e-8, 0) are clamped to zero; anything below -1e-8 is
    an error.
    """
    m = mat.matrix if isinstance(mat, DensityMatrix) else np.asarray(mat, dtype=np.complex128)
    spec = hermitian_eig(m)
    w = spec.eigenvalues
    if float(w.min()) < SQRT_CLAMP_FLOOR:
        raise ValueError(f"matrix has eigenvalue {w.min()!r} below -1e-8, not PSD")
    w = np.clip(w, 0.0, None)
    u = spec.eigenvectors
    return (u * np.sqrt(w)) @ u.conj().T


def purity(rho: DensityMatrix) -> float:
    """Tr rho^2, in [2^-n, 1] up to roundoff."""
    return float(np.sum(np.abs(rho.matrix) ** 2))


def pure_state_marginal(state: PureState, side_positions: Sequence[int]) -> np.ndarray:
    """Reduced density matrix of a pure state on the given qubit positions.

    ``side_positions`` are 1-based positions within the state; the marginal
    is built from the reshaped state vector, never from the full projector.
    """
    pos = [int(p) - 1 for p in side_positions]
    if not pos or len(set(pos)) != len(pos):
        raise ValueError("side positions must be non-empty and unique")
    if min(pos) < 0 or max(pos) >= state.n:
        raise ValueError(f"side positions out of range for n={state.n}")
    rest = [p for p in range(state.n) if p not in pos]
    tensor = state.amplitudes.reshape((2,) * state.n)
    psi = np.transpose(tensor, pos + rest).reshape(2 ** len(pos), -1)
    return psi @ psi.conj().T
