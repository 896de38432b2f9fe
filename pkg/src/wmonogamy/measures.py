"""Closed-form entanglement measures.

Implemented here:

* pure-state concurrence across a bipartition, C = sqrt(2 (1 - Tr rho_A^2))
* the two-qubit spin-flip spectrum lambda_1 >= ... >= lambda_4, from which
  the mixed-state concurrence C = max(0, l1 - l2 - l3 - l4) and the
  concurrence of assistance Ca = l1 + l2 + l3 + l4 are read off
* von Neumann entropy (base 2) and the entanglement of formation, using
  f(x) = h((1 + sqrt(1 - x)) / 2) with h the binary entropy, so that
  E = f(C^2) for any 2 x D state
* the exact pair values C = Ca = 2 |b_1| |b_i| of W-class reductions

The spin-flip spectrum is obtained as the singular values of
sqrt(rho) (sy x sy) sqrt(rho)*, which equals the square roots of the
eigenvalues of sqrt(rho) rho~ sqrt(rho) but stays accurate for the
near-zero part of the spectrum.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import DensityMatrix, PureState, psd_sqrt, pure_state_marginal
from .wstates import WClassParams

__all__ = [
    "MeasureValue",
    "WoottersSpectrum",
    "binary_entropy",
    "f_of_c2",
    "entropy",
    "concurrence_pure",
    "wootters_spectrum",
    "concurrence_mixed_2q",
    "coa_mixed_2q",
    "pair_value_w",
    "cut_value_w",
    "eof_pure",
    "eof_mixed_2q",
]

_SY = np.array([[0.0, -1.0j], [1.0j, 0.0]])
SPIN_FLIP_2Q = np.kron(_SY, _SY)

VALUE_SLACK = 1e-9
PURE_ROUNDOFF = 1e-8


@dataclass(frozen=True)
class MeasureValue:
    """A nonnegative measure value tagged with its kind and provenance.

    kind: one of C (concurrence), Ca (concurrence of assistance),
    E (entanglement of formation), Ea (entanglement of assistance).
    method: closed_form, pure_bipartition, roof_optimizer or w_closed_form.
    """

    value: float
    kind: str
    method: str

    _KINDS = ("C", "Ca", "E", "Ea")
    _METHODS = ("closed_form", "pure_bipartition", "roof_optimizer", "w_closed_form")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown measure kind {self.kind!r}")
        if self.method not in self._METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not self.value >= -VALUE_SLACK:
            raise ValueError(f"measure value {self.value!r} is negative")
        object.__setattr__(self, "value", max(float(self.value), 0.0))

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class WoottersSpectrum:
    """Spin-flip spectrum of a two-qubit state, sorted descending."""

    lambdas: np.ndarray

    def __post_init__(self):
        lam = np.array(self.lambdas, dtype=np.float64)
        if lam.shape != (4,):
            raise ValueError(f"expected four values, got shape {lam.shape}")
        if np.any(np.diff(lam) > 1e-12) or lam[-1] < -1e-12:
            raise ValueError("lambdas must be nonnegative and non-increasing")
        lam = np.clip(lam, 0.0, None)
        lam.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)

    @property
    def concurrence(self) -> float:
        lam = self.lambdas
        return max(0.0, float(lam[0] - lam[1] - lam[2] - lam[3]))

    @property
    def assistance(self) -> float:
        return float(np.sum(self.lambdas))


def binary_entropy(p: float) -> float:
    """h(p) = -p log2 p - (1-p) log2 (1-p), with h(0) = h(1) = 0."""
    p = min(max(float(p), 0.0), 1.0)
    out = 0.0
    if 0.0 < p < 1.0:
        out -= p * np.log2(p) + (1.0 - p) * np.log2(1.0 - p)
    return float(out)


def f_of_c2(c2: float) -> float:
    """h((1 + sqrt(1 - x)) / 2) for x in [0, 1]; maps C^2 to formation entropy."""
    c2 = float(c2)
    if c2 < -1e-12 or c2 > 1.0 + 1e-12:
        raise ValueError(f"argument {c2!r} outside [0, 1]")
    c2 = min(max(c2, 0.0), 1.0)
    return binary_entropy((1.0 + np.sqrt(1.0 - c2)) / 2.0)


def entropy(rho) -> float:
    """Von Neumann entropy -Tr(rho log2 rho), with 0 log 0 := 0."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=np.complex128)
    mu = np.linalg.eigvalsh((m + m.conj().T) / 2)
    mu = np.clip(mu, 0.0, 1.0)
    mu = mu[mu > 0.0]
    return float(-np.sum(mu * np.log2(mu))) if mu.size else 0.0


def _split_cut(state: PureState, side_a: Sequence[int]) -> list[int]:
    pos = sorted(int(p) for p in side_a)
    if not pos:
        raise ValueError("cut side A must be non-empty")
    if len(set(pos)) != len(pos) or pos[0] < 1 or pos[-1] > state.n:
        raise ValueError(f"cut {side_a} is not a subset of qubits 1..{state.n}")
    if len(pos) == state.n:
        raise ValueError("cut side A must leave side B non-empty")
    return pos


def concurrence_pure(state: PureState, side_a: Sequence[int]) -> MeasureValue:
    """Concurrence of a pure state across the cut (side_a | rest).

    ``side_a`` lists 1-based qubit positions within the state.
    """
    pos = _split_cut(state, side_a)
    marg = pure_state_marginal(state, pos)
    pur = float(np.sum(np.abs(marg) ** 2))
    d_min = min(marg.shape[0], 2 ** (state.n - len(pos)))
    cap = np.sqrt(2.0 * (1.0 - 1.0 / d_min))
    val = np.sqrt(max(0.0, 2.0 * (1.0 - pur)))
    if val > cap + VALUE_SLACK:
        raise ValueError(f"concurrence {val!r} exceeds cut bound {cap!r}")
    return MeasureValue(value=val, kind="C", method="pure_bipartition")


def wootters_spectrum(rho: DensityMatrix) -> WoottersSpectrum:
    """Spin-flip spectrum of a two-qubit density matrix."""
    if rho.dim != 4:
        raise ValueError(f"need a two-qubit state, got dimension {rho.dim}")
    s = psd_sqrt(rho)
    lam = np.linalg.svd(s @ SPIN_FLIP_2Q @ s.conj(), compute_uv=False)
    return WoottersSpectrum(lambdas=lam)


def concurrence_mixed_2q(rho: DensityMatrix) -> MeasureValue:
    """Two-qubit mixed-state concurrence max(0, l1 - l2 - l3 - l4)."""
    spec = wootters_spectrum(rho)
    return MeasureValue(value=spec.concurrence, kind="C", method="closed_form")


def coa_mixed_2q(rho: DensityMatrix) -> MeasureValue:
    """Two-qubit concurrence of assistance l1 + l2 + l3 + l4.

    This is the fidelity between rho and its spin flip, the attainable
    maximum of the ensemble-average concurrence.
    """
    spec = wootters_spectrum(rho)
    val = spec.assistance
    if val < spec.concurrence - VALUE_SLACK:
        raise AssertionError("assistance fell below concurrence")
    return MeasureValue(value=val, kind="Ca", method="closed_form")


def pair_value_w(params: WClassParams, i: int) -> MeasureValue:
    """Exact pair value 2 |b_1| |b_i| of a W-class reduction.

    Every pure-state decomposition of the (1, i) reduction has the same
    average concurrence, so concurrence and assistance both equal this.
    """
    if not 2 <= i <= params.n:
        raise ValueError(f"pair index must satisfy 2 <= i <= {params.n}, got {i}")
    val = 2.0 * abs(params.b[0]) * abs(params.b[i - 1])
    return MeasureValue(value=val, kind="C", method="w_closed_form")


def cut_value_w(params: WClassParams, subset: Sequence[int]) -> MeasureValue:
    """Exact concurrence (= assistance) of a subset reduction across qubit 1.

    A W-class state reduced to a subset containing qubit 1 lives in a
    2 x 2 subspace of the (qubit 1 | rest-of-subset) cut, and every
    decomposition averages to 2 |b_1| sqrt(sum_{j in subset, j != 1} |b_j|^2).
    """
    labels = sorted(int(q) for q in subset)
    if 1 not in labels or len(labels) < 2 or labels[-1] > params.n or labels[0] < 1:
        raise ValueError(f"subset {subset} must contain qubit 1 and fit n={params.n}")
    if len(set(labels)) != len(labels):
        raise ValueError(f"subset has repeated labels: {subset}")
    beta_sq = sum(abs(params.b[q - 1]) ** 2 for q in labels if q != 1)
    val = 2.0 * abs(params.b[0]) * np.sqrt(beta_sq)
    return MeasureValue(value=val, kind="C", method="w_closed_form")


def eof_pure(state: PureState, side_a: Sequence[int]) -> MeasureValue:
    """Entanglement of formation of a pure state: entropy of the A marginal."""
    pos = _split_cut(state, side_a)
    marg = pure_state_marginal(state, pos)
    val = entropy(marg)
    d_min = min(marg.shape[0], 2 ** (state.n - len(pos)))
    if val > np.log2(d_min) + VALUE_SLACK:
        raise ValueError(f"entropy {val!r} exceeds log2 of the cut dimension")
    return MeasureValue(value=val, kind="E", method="pure_bipartition")


def eof_mixed_2q(rho: DensityMatrix) -> MeasureValue:
    """Two-qubit entanglement of formation f(C^2)."""
    c = concurrence_mixed_2q(rho).value
    return MeasureValue(value=f_of_c2(c * c), kind="E", method="closed_form")
