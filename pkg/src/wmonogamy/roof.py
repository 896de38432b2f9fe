"""Numerical convex-roof extension solver.

The roof extension of a pure-state measure M evaluates, over all ensemble
decompositions {p_h, psi_h} of a mixed state rho, the extremum of
sum_h p_h M(psi_h): the minimum defines measures like the entanglement of
formation, the maximum the assisted measures.  Every decomposition of a
rank-k state into r pure states is obtained from the eigen-ensemble through
an r x k isometry (mixing theorem), so the solver runs multi-start
derivative-free coordinate descent over a Givens-angle chart of that
isometry manifold.

Local optimization is one-sided: a ``min`` solve returns an upper bound on
the true roof, a ``max`` solve a lower bound.  The lower bound is always
attainable because the returned ensemble certifies it.  Solutions carry a
``bound_direction`` tag so downstream inequality checks can compose bounds
rigorously.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import DensityMatrix, PureState, hermitian_eig, pure_state_marginal
from .measures import MeasureValue, entropy
from .wstates import WClassParams, reduced_subset

__all__ = [
    "EnsembleDecomposition",
    "RoofProblem",
    "RoofSolution",
    "support_decomposition",
    "apply_mixing",
    "solve_roof",
    "coa_reduced_w",
    "problem_to_dict",
    "problem_from_dict",
    "solution_to_dict",
]

FUNCTIONALS = ("concurrence", "entropy")
DIRECTIONS = ("min", "max")

SUPPORT_EIG_FLOOR = 1e-10
DROP_WEIGHT = 1e-12
ISOMETRY_ATOL = 1e-10
RECONSTRUCT_ATOL = 1e-8
R_MAX_CAP = 8


@dataclass(frozen=True)
class EnsembleDecomposition:
    """Weighted pure states realizing a mixed state on ``qubits``."""

    weights: np.ndarray
    vectors: np.ndarray
    qubits: tuple[int, ...]

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        v = np.array(self.vectors, dtype=np.complex128)
        if w.ndim != 1 or v.ndim != 2 or v.shape[0] != w.size:
            raise ValueError("weights and vectors shapes are inconsistent")
        if v.shape[1] != 2 ** len(self.qubits):
            raise ValueError("vector length does not match the qubit count")
        if np.any(w <= 0.0):
            raise ValueError("ensemble weights must be positive")
        if abs(float(w.sum()) - 1.0) > 1e-9:
            raise ValueError(f"ensemble weights sum to {w.sum()!r}, expected 1")
        norms = np.linalg.norm(v, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-9:
            raise ValueError("ensemble states must be normalized")
        w.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "vectors", v)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))

    @property
    def size(self) -> int:
        return int(self.weights.size)

    def states(self) -> list[PureState]:
        n = len(self.qubits)
        return [PureState(n=n, amplitudes=vec) for vec in self.vectors]

    def density(self) -> np.ndarray:
        return (self.vectors.T * self.weights) @ self.vectors.conj()


@dataclass(frozen=True)
class RoofProblem:
    """A roof-extension optimization instance.

    ``cut`` lists the qubit labels forming side A of the bipartition the
    pure-state functional is evaluated across; it defaults to the first
    qubit of ``rho``.
    """

    rho: DensityMatrix
    functional: str = "concurrence"
    direction: str = "min"
    cut: tuple[int, ...] = ()
    r_max: int | None = None
    starts: int = 32
    tol: float = 1e-7
    seed: int = 0
    max_sweeps: int = 10_000

    def __post_init__(self):
        if self.functional not in FUNCTIONALS:
            raise ValueError(f"functional must be one of {FUNCTIONALS}")
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")
        cut = tuple(int(q) for q in self.cut) or (self.rho.qubits[0],)
        if not set(cut) < set(self.rho.qubits) or not cut:
            raise ValueError(f"cut {cut} must be a proper non-empty subset of {self.rho.qubits}")
        if self.starts < 1:
            raise ValueError("starts must be >= 1")
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")
        if self.r_max is not None and self.r_max > R_MAX_CAP:
            raise ValueError(f"r_max {self.r_max} exceeds the cap {R_MAX_CAP}")
        object.__setattr__(self, "cut", cut)


@dataclass(frozen=True)
class RoofSolution:
    """Best value found, the certifying ensemble, and solver diagnostics."""

    value: float
    ensemble: EnsembleDecomposition
    converged: bool
    iterations: int
    start_index: int
    functional: str
    direction: str

    @property
    def bound_direction(self) -> str:
        return "upper_bound_on_roof" if self.direction == "min" else "lower_bound_on_roof"


def support_decomposition(rho: DensityMatrix) -> EnsembleDecomposition:
    """Eigen-ensemble of ``rho``: the canonical seed decomposition."""
    spec = hermitian_eig(rho)
    keep = spec.eigenvalues > SUPPORT_EIG_FLOOR
    w = spec.eigenvalues[keep]
    vecs = spec.eigenvectors[:, keep].T
    return EnsembleDecomposition(weights=w / w.sum(), vectors=vecs, qubits=rho.qubits)


def apply_mixing(seed: EnsembleDecomposition, v: np.ndarray) -> EnsembleDecomposition:
    """Mix the seed ensemble through an isometry with orthonormal columns.

    Rows of ``v`` index the output ensemble; elements with weight below
    1e-12 are dropped.
    """
    v = np.asarray(v, dtype=np.complex128)
    k = seed.size
    if v.ndim != 2 or v.shape[1] != k:
        raise ValueError(f"expected an r x {k} matrix, got shape {v.shape}")
    gram = v.conj().T @ v
    if np.max(np.abs(gram - np.eye(k))) > ISOMETRY_ATOL:
        raise ValueError("mixing matrix does not have orthonormal columns")
    scaled = np.sqrt(seed.weights)[:, None] * seed.vectors
    phi = v @ scaled
    weights = np.sum(np.abs(phi) ** 2, axis=1)
    keep = weights > DROP_WEIGHT
    weights = weights[keep]
    vecs = phi[keep] / np.sqrt(weights)[:, None]
    return EnsembleDecomposition(weights=weights, vectors=vecs, qubits=seed.qubits)


def _cut_positions(qubits: Sequence[int], cut: Sequence[int]) -> list[int]:
    return [qubits.index(q) for q in cut]


def _basis_permutation(nq: int, front_positions: Sequence[int]) -> np.ndarray:
    """old basis index for each new index, with ``front_positions`` as MSBs."""
    order = list(front_positions) + [p for p in range(nq) if p not in front_positions]
    idx = np.arange(2**nq, dtype=np.intp)
    out = np.zeros(2**nq, dtype=np.intp)
    for new_pos, old_pos in enumerate(order):
        bit = (idx >> (nq - 1 - new_pos)) & 1
        out += bit << (nq - 1 - old_pos)
    return out


def _pure_cut_value(vec: np.ndarray, nq: int, cut_positions: Sequence[int], functional: str) -> float:
    state = PureState(n=nq, amplitudes=vec)
    marg = pure_state_marginal(state, [p + 1 for p in cut_positions])
    if functional == "concurrence":
        pur = float(np.sum(np.abs(marg) ** 2))
        return float(np.sqrt(max(0.0, 2.0 * (1.0 - pur))))
    return entropy(marg)


def _ensemble_average(ens: EnsembleDecomposition, cut_positions, functional) -> float:
    nq = len(ens.qubits)
    return float(
        sum(
            w * _pure_cut_value(vec, nq, cut_positions, functional)
            for w, vec in zip(ens.weights, ens.vectors)
        )
    )


def solve_roof(problem: RoofProblem) -> RoofSolution:
    """Multi-start coordinate-descent search for the roof extremum.

    Start 0 begins at the seed eigen-ensemble, so a ``max`` solution is never
    below (and a ``min`` never above) the eigen-ensemble average.  The
    reported value is re-evaluated from the final ensemble with the
    measure implementations, not the search kernel.
    """
    from . import _kernels

    seed_ens = support_decomposition(problem.rho)
    cut_pos = _cut_positions(problem.rho.qubits, problem.cut)
    k = seed_ens.size

    if k == 1:
        value = _ensemble_average(seed_ens, cut_pos, problem.functional)
        return RoofSolution(
            value=value, ensemble=seed_ens, converged=True, iterations=0,
            start_index=0, functional=problem.functional, direction=problem.direction,
        )

    if k > R_MAX_CAP:
        raise ValueError(f"state rank {k} exceeds the supported cap {R_MAX_CAP}")
    r = problem.r_max if problem.r_max is not None else min(max(4, k + 2), R_MAX_CAP)
    if r < k:
        raise ValueError(f"r_max {r} is below the state rank {k}")

    nq = len(problem.rho.qubits)
    perm = _basis_permutation(nq, cut_pos)
    b = (np.sqrt(seed_ens.weights)[:, None] * seed_ens.vectors)[:, perm]
    b = np.ascontiguousarray(b)
    d_a = 2 ** len(cut_pos)
    d_b = 2 ** (nq - len(cut_pos))

    pair_a, pair_b = _kernels.pair_arrays(r, k)
    nparams = _kernels.n_params(r, k)
    kind = _kernels.KIND_CONCURRENCE if problem.functional == "concurrence" else _kernels.KIND_ENTROPY
    sign = 1.0 if problem.direction == "min" else -1.0

    best = (np.inf, None, False, 0, 0)
    for s in range(problem.starts):
        if s == 0:
            theta = np.zeros(nparams)
        else:
            theta = np.random.default_rng([problem.seed, s]).uniform(-np.pi, np.pi, nparams)
        val, sweeps, conv = _kernels.coordinate_descent(
            theta, pair_a, pair_b, b, r, k, d_a, d_b, kind,
            sign, problem.tol, problem.max_sweeps,
        )
        if val < best[0]:
            best = (val, theta, conv, sweeps, s)

    _, theta, conv, sweeps, s_idx = best
    v = _kernels.build_isometry(theta, pair_a, pair_b, r, k)
    ensemble = apply_mixing(seed_ens, v)
    value = _ensemble_average(ensemble, cut_pos, problem.functional)
    return RoofSolution(
        value=value, ensemble=ensemble, converged=bool(conv), iterations=int(sweeps),
        start_index=int(s_idx), functional=problem.functional, direction=problem.direction,
    )


def coa_reduced_w(params: WClassParams, subset: Sequence[int], **overrides):
    """Assistance estimate for a subset reduction across qubit 1.

    Returns (value, certificate ensemble).  For the full qubit set the state
    is pure and the value is exact; otherwise it is the roof maximum found,
    a rigorous attainable lower bound on the true assistance.
    """
    rho = reduced_subset(params, subset)
    problem = RoofProblem(rho=rho, functional="concurrence", direction="max", cut=(1,), **overrides)
    solution = solve_roof(problem)
    method = "pure_bipartition" if len(rho.qubits) == params.n else "roof_optimizer"
    return MeasureValue(value=solution.value, kind="Ca", method=method), solution.ensemble


def _complex_to_pair(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def _matrix_to_pairs(m: np.ndarray) -> list:
    return [[_complex_to_pair(z) for z in row] for row in np.asarray(m)]


def _matrix_from_pairs(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=np.complex128)


def problem_to_dict(problem: RoofProblem) -> dict:
    return {
        "rho": {
            "qubits": list(problem.rho.qubits),
            "matrix": _matrix_to_pairs(problem.rho.matrix),
        },
        "functional": problem.functional,
        "direction": problem.direction,
        "cut": list(problem.cut),
        "r_max": problem.r_max,
        "starts": problem.starts,
        "tol": problem.tol,
        "seed": problem.seed,
        "max_sweeps": problem.max_sweeps,
    }


def problem_from_dict(data: dict) -> RoofProblem:
    rho = DensityMatrix(
        qubits=tuple(data["rho"]["qubits"]),
        matrix=_matrix_from_pairs(data["rho"]["matrix"]),
    )
    return RoofProblem(
        rho=rho,
        functional=data.get("functional", "concurrence"),
        direction=data.get("direction", "min"),
        cut=tuple(data.get("cut", ())),
        r_max=data.get("r_max"),
        starts=int(data.get("starts", 32)),
        tol=float(data.get("tol", 1e-7)),
        seed=int(data.get("seed", 0)),
        max_sweeps=int(data.get("max_sweeps", 10_000)),
    )


def solution_to_dict(solution: RoofSolution) -> dict:
    return {
        "value": solution.value,
        "bound_direction": solution.bound_direction,
        "functional": solution.functional,
        "direction": solution.direction,
        "converged": solution.converged,
        "iterations": solution.iterations,
        "start_index": solution.start_index,
        "ensemble": {
            "qubits": list(solution.ensemble.qubits),
            "weights": [float(w) for w in solution.ensemble.weights],
            "states": _matrix_to_pairs(solution.ensemble.vectors),
        },
    }
