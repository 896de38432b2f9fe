"""Generalized W-class states: construction, reduction, sampling, file I/O.

A generalized W-class state on n qubits is spanned by the vacuum |0...0>
and the n single-excitation basis states:

    |psi> = a |00...0> + b_1 |10...0> + b_2 |01...0> + ... + b_n |00...1>

with |a|^2 + sum_i |b_i|^2 = 1.  Tracing such a state down to any qubit
subset that contains qubit 1 yields a rank <= 2 mixture of a W-class state
on the subset and the vacuum projector; the helpers here expose that
structure directly, which the measure and inequality modules rely on.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .linalg import DensityMatrix, PureState, hermitian_eig

__all__ = [
    "WClassParams",
    "RankTwoSupport",
    "WVacuumSplit",
    "StructureError",
    "build_w_state",
    "rank_two_support",
    "reduced_pair",
    "reduced_subset",
    "w_plus_vacuum_split",
    "sample_w_params",
    "example_five_qubit_params",
    "params_to_dict",
    "params_from_dict",
    "write_state_json",
    "read_state_json",
]

PARAMS_NORM_ATOL = 1e-12
STATE_NORM_ATOL = 1e-9
SPLIT_RESIDUAL_ATOL = 1e-8


class StructureError(ValueError):
    """Raised when a matrix does not have the expected W-plus-vacuum form."""


@dataclass(frozen=True)
class WClassParams:
    """Amplitudes (a, b_1..b_n) of a generalized W-class state."""

    n: int
    a: complex
    b: np.ndarray

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need n >= 2 qubits, got {self.n}")
        b = np.array(self.b, dtype=np.complex128).ravel()
        if b.size != self.n:
            raise ValueError(f"need {self.n} excitation amplitudes, got {b.size}")
        total = abs(self.a) ** 2 + float(np.sum(np.abs(b) ** 2))
        if abs(total - 1.0) > PARAMS_NORM_ATOL:
            raise ValueError(f"|a|^2 + sum |b_i|^2 = {total!r}, expected 1")
        b.setflags(write=False)
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", b)

    @classmethod
    def normalized(cls, n: int, a: complex, b) -> "WClassParams":
        """Construct after rescaling (a, b) to unit total weight."""
        vec = np.concatenate([[complex(a)], np.asarray(b, dtype=np.complex128).ravel()])
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            raise ValueError("cannot normalize all-zero amplitudes")
        vec = vec / norm
        return cls(n=n, a=vec[0], b=vec[1:])


@dataclass(frozen=True)
class RankTwoSupport:
    """Unnormalized two-qubit support vectors of a pair reduction.

    For the pair (qubit 1, qubit i) of a W-class state the reduced matrix is
    exactly |x><x| + |y><y| with

        x = a|00> + b_1|10> + b_i|01>
        y = sqrt(sum_{k>=2, k!=i} |b_k|^2) |00>
    """

    x_vec: np.ndarray
    y_vec: np.ndarray
    pair: tuple[int, int]

    def density(self) -> np.ndarray:
        return np.outer(self.x_vec, self.x_vec.conj()) + np.outer(self.y_vec, self.y_vec.conj())


class WVacuumSplit(NamedTuple):
    weight_w: float
    params: WClassParams
    weight_vac: float
    degenerate: bool = False


def _excitation_index(n: int, i: int) -> int:
    # qubit i (1-based) set, all others zero; qubit 1 is the MSB
    return 1 << (n - i)


def build_w_state(params: WClassParams) -> PureState:
    """State vector of the W-class state defined by ``params``."""
    n = params.n
    amps = np.zeros(2**n, dtype=np.complex128)
    amps[0] = params.a
    for i in range(1, n + 1):
        amps[_excitation_index(n, i)] = params.b[i - 1]
    norm_sq = float(np.sum(np.abs(amps) ** 2))
    if abs(norm_sq - 1.0) > STATE_NORM_ATOL:
        raise ValueError(f"parameters violate normalization: {norm_sq!r}")
    return PureState(n=n, amplitudes=amps)


def rank_two_support(params: WClassParams, i: int) -> RankTwoSupport:
    """Support vectors of the reduction to the pair (qubit 1, qubit i)."""
    _check_pair_index(params, i)
    x = np.zeros(4, dtype=np.complex128)
    x[0] = params.a
    x[2] = params.b[0]       # |10>: qubit 1 excited
    x[1] = params.b[i - 1]   # |01>: qubit i excited
    rest = np.abs(params.b[1:]) ** 2
    rest_sum = float(np.sum(rest)) - abs(params.b[i - 1]) ** 2
    y = np.zeros(4, dtype=np.complex128)
    y[0] = np.sqrt(max(rest_sum, 0.0))
    return RankTwoSupport(x_vec=x, y_vec=y, pair=(1, i))


def reduced_pair(params: WClassParams, i: int) -> DensityMatrix:
    """Two-qubit reduced density matrix on (qubit 1, qubit i)."""
    support = rank_two_support(params, i)
    return DensityMatrix(qubits=(1, i), matrix=support.density())


def reduced_subset(params: WClassParams, subset: Sequence[int]) -> DensityMatrix:
    """Reduced density matrix on a qubit subset that contains qubit 1.

    The result has rank <= 2: a W-class component on the subset plus a
    vacuum component carrying the weight of the traced-out excitations.
    """
    labels = _check_subset(params, subset)
    n, m = params.n, len(labels)
    x = np.zeros(2**m, dtype=np.complex128)
    x[0] = params.a
    for pos, q in enumerate(labels):
        x[1 << (m - 1 - pos)] = params.b[q - 1]
    traced = [q for q in range(1, n + 1) if q not in labels]
    gamma_sq = float(np.sum(np.abs(params.b[[q - 1 for q in traced]]) ** 2)) if traced else 0.0
    rho = np.outer(x, x.conj())
    rho[0, 0] += gamma_sq
    return DensityMatrix(qubits=tuple(labels), matrix=rho)


def w_plus_vacuum_split(rho: DensityMatrix) -> WVacuumSplit:
    """Decompose a reduced W-class matrix as weight_w |W><W| + weight_vac |0..0><0..0|.

    The input must have come from tracing a W-class state down to a subset
    containing qubit 1; anything else fails the reconstruction residual.
    """
    m = rho.n_qubits
    d = rho.dim
    exc = [1 << (m - 1 - p) for p in range(m)]
    mat = rho.matrix
    block = mat[np.ix_(exc, exc)]
    t = float(np.trace(block).real)

    if t <= 1e-14:
        # no excitation support left: all weight on the vacuum by convention
        placeholder = WClassParams(n=m, a=0.0, b=np.full(m, 1.0 / np.sqrt(m), dtype=np.complex128))
        split = WVacuumSplit(0.0, placeholder, 1.0, degenerate=True)
    else:
        spec = hermitian_eig(block)
        lead = float(spec.eigenvalues[0])
        c = spec.eigenvectors[:, 0] * np.sqrt(max(lead, 0.0))
        alpha = complex(mat[0, exc] @ c) / lead
        weight_w = abs(alpha) ** 2 + lead
        weight_vac = max(float(mat[0, 0].real) - abs(alpha) ** 2, 0.0)
        w_params = WClassParams.normalized(
            n=m,
            a=alpha / np.sqrt(weight_w),
            b=c / np.sqrt(weight_w),
        )
        split = WVacuumSplit(weight_w, w_params, weight_vac, degenerate=False)

    recon = np.zeros((d, d), dtype=np.complex128)
    if split.weight_w > 0.0:
        w_vec = build_w_state(split.params).amplitudes
        recon += split.weight_w * np.outer(w_vec, w_vec.conj())
    recon[0, 0] += split.weight_vac
    residual = float(np.max(np.abs(recon - mat)))
    if residual > SPLIT_RESIDUAL_ATOL:
        raise StructureError(
            f"matrix is not a W-plus-vacuum mixture (residual {residual:.3e})"
        )
    return split


def sample_w_params(n: int, rng_seed, allow_zero_a: bool = False) -> WClassParams:
    """Draw random normalized parameters, deterministic in ``rng_seed``.

    Squared moduli are uniform on the simplex over (|a|^2, |b_1|^2, ...,
    |b_n|^2); phases are independent and uniform.  With ``allow_zero_a`` the
    vacuum amplitude is exactly zero and the simplex is over the b weights.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    rng = np.random.default_rng(rng_seed)
    if allow_zero_a:
        sq = rng.dirichlet(np.ones(n))
        phases = rng.uniform(0.0, 2.0 * np.pi, n)
        vec = np.concatenate([[0.0 + 0.0j], np.sqrt(sq) * np.exp(1j * phases)])
    else:
        sq = rng.dirichlet(np.ones(n + 1))
        phases = rng.uniform(0.0, 2.0 * np.pi, n + 1)
        vec = np.sqrt(sq) * np.exp(1j * phases)
    vec = vec / np.linalg.norm(vec)
    return WClassParams(n=n, a=vec[0], b=vec[1:])


def example_five_qubit_params() -> WClassParams:
    """The built-in five-qubit demo state wired to the --paper-example flag.

    a = b_2 = 1/sqrt(10), b_1 = 1/sqrt(15), b_3 = sqrt(2/15),
    b_4 = sqrt(3/5), b_5 = 0; the weights sum to one exactly.
    """
    b = np.array(
        [
            1.0 / np.sqrt(15.0),
            1.0 / np.sqrt(10.0),
            np.sqrt(2.0 / 15.0),
            np.sqrt(3.0 / 5.0),
            0.0,
        ],
        dtype=np.complex128,
    )
    return WClassParams.normalized(n=5, a=1.0 / np.sqrt(10.0), b=b)


def params_to_dict(params: WClassParams) -> dict:
    return {
        "n": params.n,
        "a": [params.a.real, params.a.imag],
        "b": [[z.real, z.imag] for z in params.b],
    }


def params_from_dict(data: dict) -> WClassParams:
    n = int(data["n"])
    a = complex(data["a"][0], data["a"][1])
    b = np.array([complex(re, im) for re, im in data["b"]], dtype=np.complex128)
    if b.size != n:
        raise ValueError(f"state file has {b.size} b entries for n={n}")
    total = abs(a) ** 2 + float(np.sum(np.abs(b) ** 2))
    if abs(total - 1.0) > STATE_NORM_ATOL:
        raise ValueError(f"state file normalization error {abs(total - 1.0):.3e} exceeds 1e-9")
    return WClassParams.normalized(n=n, a=a, b=b)


def write_state_json(params: WClassParams, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(params_to_dict(params), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_state_json(path) -> WClassParams:
    with open(path, "r", encoding="utf-8") as fh:
        return params_from_dict(json.load(fh))


def _check_pair_index(params: WClassParams, i: int) -> None:
    if not 2 <= i <= params.n:
        raise ValueError(f"pair index must satisfy 2 <= i <= {params.n}, got {i}")


def _check_subset(params: WClassParams, subset: Sequence[int]) -> list[int]:
    labels = sorted(int(q) for q in subset)
    if len(labels) != len(set(labels)):
        raise ValueError(f"subset has repeated labels: {subset}")
    if 1 not in labels:
        raise ValueError("subset must contain qubit 1")
    if len(labels) < 2:
        raise ValueError("subset must contain at least two qubits")
    if labels[-1] > params.n or labels[0] < 1:
        raise ValueError(f"subset {labels} out of range for n={params.n}")
    return labels
