"""Monogamy-inequality evaluation for W-class states.

Each checker compares one party's entanglement with a group against the sum
of its pairwise entanglements and emits a :class:`MonogamyReport` with a
signed residual (residual >= 0 means the inequality holds).  Inequality
identifiers:

    EQ4_concurrence   C^x(1|rest) >= sum_i C^x(pair 1,i), x >= 2
    EQ5_concurrence   C^b(1|rest) <  sum_i C^b(pair 1,i), b <= 0 (strict)
    EQ6_dual_coa      sum_i Ca^2(pair 1,i) >= C^2(1|rest)
    TH1_coa_x         Ca^x(subset cut at 1) >= sum_j Ca^x(pair), x >= 2
    TH2_coa_y         Ca^y(subset cut at 1) <  sum_j Ca^y(pair), y <= 0 (strict)
    TH3_eof           E(1|rest) <= sum_i E(pair 1,i)
    TH4_eoa           E(subset cut at 1) <= sum_j Ea(pair 1,j)
    EQ13_eof_alpha    E^a(1|rest) >= sum_i E^a(pair 1,i), a >= sqrt(2)
    FIG1_bounds       power-mean lower-bound curves stay below the purity
                      upper bound and decrease in x

Pair values on the right-hand sides always use the exact product form
2 |b_1| |b_i| of W-class reductions, so closed-form verdicts are
independent of the eigensolver pipeline.  Optimizer-backed left-hand sides
carry one-sided bound semantics: a "satisfied" verdict is rigorous, while
"violated" is only ever produced by closed-form paths.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator, Sequence

import numpy as np

from .measures import cut_value_w, eof_pure, f_of_c2, pair_value_w
from .roof import RoofProblem, solve_roof
from .wstates import WClassParams, build_w_state, reduced_pair, reduced_subset, sample_w_params

__all__ = [
    "DomainError",
    "MonogamyQuery",
    "MonogamyReport",
    "INEQUALITY_IDS",
    "resolve_inequality_id",
    "residual_concurrence_power",
    "residual_concurrence_negative_power",
    "check_coa_power",
    "check_coa_negative_power",
    "check_dual_coa",
    "check_eof_pair_sum",
    "check_eoa_pair_sum",
    "check_eof_power",
    "FigureTable",
    "fig1_curves",
    "default_fig1_grid",
    "check_fig1_bounds",
    "run_query",
    "iter_campaign",
    "summarize_reports",
    "report_json_line",
]

TOL_CLOSED = 1e-9
TOL_ROOF = 1e-5
STRICT_EPS = 1e-12
ALPHA_MIN = float(np.sqrt(2.0))

VERDICT_SATISFIED = "satisfied"
VERDICT_VIOLATED = "violated"
VERDICT_INCONCLUSIVE = "inconclusive"
VERDICT_SKIPPED = "domain_skipped"

INEQUALITY_IDS = (
    "EQ4_concurrence",
    "EQ5_concurrence",
    "EQ6_dual_coa",
    "TH1_coa_x",
    "TH2_coa_y",
    "EQ13_eof_alpha",
    "TH3_eof",
    "TH4_eoa",
    "FIG1_bounds",
)

_ALIASES = {
    "eq4": "EQ4_concurrence",
    "eq5": "EQ5_concurrence",
    "eq6": "EQ6_dual_coa",
    "th1": "TH1_coa_x",
    "th2": "TH2_coa_y",
    "th3": "TH3_eof",
    "th4": "TH4_eoa",
    "eq13": "EQ13_eof_alpha",
    "fig1": "FIG1_bounds",
}

_DEFAULT_EXPONENTS = {
    "EQ4_concurrence": 2.0,
    "TH1_coa_x": 2.0,
    "EQ5_concurrence": -1.0,
    "TH2_coa_y": -1.0,
    "EQ13_eof_alpha": ALPHA_MIN,
}


class DomainError(ValueError):
    """An input is outside the domain an inequality is stated for."""


def resolve_inequality_id(name: str) -> str:
    if name in INEQUALITY_IDS:
        return name
    key = name.strip().lower()
    if key in _ALIASES:
        return _ALIASES[key]
    for canonical in INEQUALITY_IDS:
        if key == canonical.lower():
            return canonical
    raise ValueError(f"unknown inequality id {name!r}; known: {', '.join(_ALIASES)}")


@dataclass(frozen=True)
class MonogamyQuery:
    """One inequality evaluation request."""

    params: WClassParams
    inequality_id: str
    subset: tuple[int, ...] | None = None
    exponent: float | None = None

    def __post_init__(self):
        ineq = resolve_inequality_id(self.inequality_id)
        object.__setattr__(self, "inequality_id", ineq)
        if self.subset is not None:
            object.__setattr__(self, "subset", tuple(int(q) for q in self.subset))
        exp = self.exponent
        if exp is None and ineq in _DEFAULT_EXPONENTS:
            exp = _DEFAULT_EXPONENTS[ineq]
            object.__setattr__(self, "exponent", exp)
        if exp is not None:
            _check_exponent_domain(ineq, exp)


def _check_exponent_domain(ineq: str, exponent: float) -> None:
    if ineq in ("EQ4_concurrence", "TH1_coa_x") and exponent < 2.0:
        raise DomainError(f"{ineq} needs exponent >= 2, got {exponent}")
    if ineq in ("EQ5_concurrence", "TH2_coa_y") and exponent > 0.0:
        raise DomainError(f"{ineq} needs exponent <= 0, got {exponent}")
    if ineq == "EQ13_eof_alpha" and exponent < ALPHA_MIN - 1e-12:
        raise DomainError(f"{ineq} needs exponent >= sqrt(2), got {exponent}")


@dataclass
class MonogamyReport:
    """Residual, verdict and provenance of one inequality evaluation."""

    inequality_id: str
    verdict: str
    satisfied: bool | None
    lhs: float | None
    rhs: float | None
    residual: float | None
    tol: float
    method: str
    n: int
    exponent: float | None = None
    subset: tuple[int, ...] | None = None
    seed: int | None = None
    sample_index: int | None = None
    detail: str = ""
    notes: str = ""

    def to_dict(self) -> dict:
        return {
            "inequality_id": self.inequality_id,
            "verdict": self.verdict,
            "satisfied": self.satisfied,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "residual": self.residual,
            "tol": self.tol,
            "method": self.method,
            "n": self.n,
            "exponent": self.exponent,
            "subset": list(self.subset) if self.subset is not None else None,
            "seed": self.seed,
            "sample_index": self.sample_index,
            "detail": self.detail,
            "notes": self.notes,
        }


def report_json_line(report: MonogamyReport) -> str:
    import json

    return json.dumps(report.to_dict(), sort_keys=True, separators=(",", ":"))


def _pair_values(params: WClassParams, indices: Iterable[int]) -> list[float]:
    return [pair_value_w(params, i).value for i in indices]


def _full_cut_concurrence(params: WClassParams) -> float:
    state = build_w_state(params)
    from .measures import concurrence_pure

    return concurrence_pure(state, [1]).value


def _full_cut_entropy(params: WClassParams) -> float:
    return eof_pure(build_w_state(params), [1]).value


def _closed_report(ineq, lhs, rhs, residual, params, tol=TOL_CLOSED, strict=False,
                   exponent=None, subset=None, method="closed_form", notes=""):
    if strict:
        ok = residual > STRICT_EPS
    else:
        ok = residual >= -tol
    return MonogamyReport(
        inequality_id=ineq,
        verdict=VERDICT_SATISFIED if ok else VERDICT_VIOLATED,
        satisfied=ok,
        lhs=float(lhs),
        rhs=float(rhs),
        residual=float(residual),
        tol=STRICT_EPS if strict else tol,
        method=method,
        n=params.n,
        exponent=exponent,
        subset=tuple(subset) if subset is not None else None,
        notes=notes,
    )


def _skipped_report(ineq, params, reason, exponent=None, subset=None):
    return MonogamyReport(
        inequality_id=ineq,
        verdict=VERDICT_SKIPPED,
        satisfied=None,
        lhs=None,
        rhs=None,
        residual=None,
        tol=TOL_CLOSED,
        method="n/a",
        n=params.n,
        exponent=exponent,
        subset=tuple(subset) if subset is not None else None,
        notes=reason,
    )


def residual_concurrence_power(params: WClassParams, exponent: float = 2.0) -> MonogamyReport:
    """C^x of the (1 | rest) cut versus the sum of pair values, x >= 2."""
    if exponent < 2.0:
        raise DomainError(f"exponent must be >= 2, got {exponent}")
    c_full = _full_cut_concurrence(params)
    pairs = _pair_values(params, range(2, params.n + 1))
    lhs = c_full**exponent
    rhs = float(sum(p**exponent for p in pairs))
    return _closed_report("EQ4_concurrence", lhs, rhs, lhs - rhs, params, exponent=exponent)


def residual_concurrence_negative_power(params: WClassParams, exponent: float = -1.0) -> MonogamyReport:
    """Reversed strict inequality for nonpositive powers of the concurrence.

    All pair concurrences must be nonzero (zero bases have no nonpositive
    power); two qubits leave nothing to compare, so n = 2 is skipped.
    """
    if exponent > 0.0:
        raise DomainError(f"exponent must be <= 0, got {exponent}")
    if params.n == 2:
        return _skipped_report(
            "EQ5_concurrence", params,
            "single-pair state: both sides are the same quantity", exponent=exponent,
        )
    pairs = _pair_values(params, range(2, params.n + 1))
    _require_nonzero_pairs(pairs, range(2, params.n + 1))
    c_full = _full_cut_concurrence(params)
    lhs = c_full**exponent
    rhs = float(sum(p**exponent for p in pairs))
    return _closed_report(
        "EQ5_concurrence", lhs, rhs, rhs - lhs, params, strict=True, exponent=exponent,
    )


def _require_nonzero_pairs(values: Sequence[float], indices: Iterable[int]) -> None:
    for i, v in zip(indices, values):
        if v == 0.0:
            raise DomainError(f"pair (1, {i}) has zero concurrence; nonpositive powers undefined")


def check_coa_power(params: WClassParams, subset: Sequence[int], exponent: float = 2.0,
                    lhs_method: str = "closed_form", optimizer: dict | None = None) -> MonogamyReport:
    """Assistance power bound on a subset: Ca^x(cut at 1) >= sum of pair terms.

    ``lhs_method="closed_form"`` evaluates the exact subset value; ``"roof"``
    uses the optimizer's attainable lower bound, in which case a shortfall is
    inconclusive rather than a violation.
    """
    if exponent < 2.0:
        raise DomainError(f"exponent must be >= 2, got {exponent}")
    labels = sorted(int(q) for q in subset)
    others = [q for q in labels if q != 1]
    rhs = float(sum(p**exponent for p in _pair_values(params, others)))
    if lhs_method == "closed_form":
        lhs = cut_value_w(params, labels).value ** exponent
        return _closed_report("TH1_coa_x", lhs, rhs, lhs - rhs, params,
                              exponent=exponent, subset=labels)
    lhs_est, _ = _coa_estimate(params, labels, optimizer)
    lhs = lhs_est**exponent
    ok = lhs >= rhs - TOL_ROOF
    return MonogamyReport(
        inequality_id="TH1_coa_x",
        verdict=VERDICT_SATISFIED if ok else VERDICT_INCONCLUSIVE,
        satisfied=ok,
        lhs=float(lhs),
        rhs=rhs,
        residual=float(lhs - rhs),
        tol=TOL_ROOF,
        method="roof_bound",
        n=params.n,
        exponent=exponent,
        subset=tuple(labels),
        notes="lhs is an attainable lower bound on the assistance",
    )


def check_coa_negative_power(params: WClassParams, subset: Sequence[int], exponent: float = -1.0,
                             lhs_method: str = "closed_form", optimizer: dict | None = None) -> MonogamyReport:
    """Reversed strict assistance bound for nonpositive powers on a subset.

    A two-qubit subset reduces both sides to the same pair value, so m = 2
    is recorded as domain_skipped.
    """
    if exponent > 0.0:
        raise DomainError(f"exponent must be <= 0, got {exponent}")
    labels = sorted(int(q) for q in subset)
    others = [q for q in labels if q != 1]
    if len(labels) == 2:
        return _skipped_report(
            "TH2_coa_y", params,
            "two-qubit subset: both sides are the same quantity",
            exponent=exponent, subset=labels,
        )
    pairs = _pair_values(params, others)
    _require_nonzero_pairs(pairs, others)
    rhs = float(sum(p**exponent for p in pairs))
    if lhs_method == "closed_form":
        lhs = cut_value_w(params, labels).value ** exponent
        return _closed_report("TH2_coa_y", lhs, rhs, rhs - lhs, params, strict=True,
                              exponent=exponent, subset=labels)
    # a lower bound on Ca gives an upper bound on Ca^y, the conservative side
    lhs_est, _ = _coa_estimate(params, labels, optimizer)
    lhs = lhs_est**exponent
    ok = rhs - lhs > STRICT_EPS
    return MonogamyReport(
        inequality_id="TH2_coa_y",
        verdict=VERDICT_SATISFIED if ok else VERDICT_INCONCLUSIVE,
        satisfied=ok,
        lhs=float(lhs),
        rhs=rhs,
        residual=float(rhs - lhs),
        tol=STRICT_EPS,
        method="roof_bound",
        n=params.n,
        exponent=exponent,
        subset=tuple(labels),
        notes="lhs overestimates the assistance power, so satisfied is rigorous",
    )


def _coa_estimate(params: WClassParams, labels: Sequence[int], optimizer: dict | None):
    from .roof import coa_reduced_w

    opts = dict(optimizer or {})
    value, ensemble = coa_reduced_w(params, labels, **opts)
    return value.value, ensemble


def check_dual_coa(params: WClassParams) -> MonogamyReport:
    """Squared assistance of the pairs versus the squared (1 | rest) cut.

    For W-class states the two sides agree exactly (squared-concurrence
    additivity plus pair assistance = pair concurrence).
    """
    pairs = _pair_values(params, range(2, params.n + 1))
    c_full = _full_cut_concurrence(params)
    lhs = float(sum(p * p for p in pairs))
    rhs = c_full * c_full
    return _closed_report(
        "EQ6_dual_coa", lhs, rhs, lhs - rhs, params,
        notes="equality expected for W-class inputs",
    )


def check_eof_pair_sum(params: WClassParams) -> MonogamyReport:
    """Formation entropy of the (1 | rest) cut versus the pair formation sum."""
    lhs = _full_cut_entropy(params)
    rhs = float(sum(f_of_c2(p * p) for p in _pair_values(params, range(2, params.n + 1))))
    return _closed_report("TH3_eof", lhs, rhs, rhs - lhs, params)


def check_eoa_pair_sum(params: WClassParams, subset: Sequence[int],
                       optimizer: dict | None = None) -> MonogamyReport:
    """Formation of a subset reduction versus the assisted-entropy pair sum.

    The left side is a roof-min estimate (an upper bound on the true
    formation; exact when the subset is the full state), the right side a
    sum of attainable roof-max estimates.  When the upper bound sits below
    the lower bound the inequality is proved; otherwise the sample is
    consistent but inconclusive.  This checker never reports a violation.
    """
    labels = sorted(int(q) for q in subset)
    others = [q for q in labels if q != 1]
    opts = dict(optimizer or {})
    opts.setdefault("starts", 8)

    rho = reduced_subset(params, labels)
    if len(labels) == params.n:
        lhs = _full_cut_entropy(params)
        detail_lhs = "exact"
    else:
        sol = solve_roof(RoofProblem(rho=rho, functional="entropy", direction="min",
                                     cut=(1,), **opts))
        lhs = sol.value
        detail_lhs = "roof_min"

    rhs = 0.0
    for j in others:
        pair_rho = reduced_pair(params, j)
        sol = solve_roof(RoofProblem(rho=pair_rho, functional="entropy", direction="max",
                                     cut=(1,), **opts))
        rhs += sol.value

    residual = rhs - lhs
    proved = residual >= -TOL_ROOF
    return MonogamyReport(
        inequality_id="TH4_eoa",
        verdict=VERDICT_SATISFIED if proved else VERDICT_INCONCLUSIVE,
        satisfied=proved,
        lhs=float(lhs),
        rhs=float(rhs),
        residual=float(residual),
        tol=TOL_ROOF,
        method="roof_bound",
        n=params.n,
        subset=tuple(labels),
        detail="proved" if proved else "consistent",
        notes=f"lhs ({detail_lhs}) bounds the formation from above, "
              "rhs sums attainable lower bounds",
    )


def check_eof_power(params: WClassParams, exponent: float = ALPHA_MIN) -> MonogamyReport:
    """Power bound on the formation entropy for exponents >= sqrt(2)."""
    if exponent < ALPHA_MIN - 1e-12:
        raise DomainError(f"exponent must be >= sqrt(2), got {exponent}")
    lhs = _full_cut_entropy(params) ** exponent
    rhs = float(sum(f_of_c2(p * p) ** exponent
                    for p in _pair_values(params, range(2, params.n + 1))))
    return _closed_report("EQ13_eof_alpha", lhs, rhs, lhs - rhs, params, exponent=exponent)


@dataclass(frozen=True)
class FigureTable:
    """Lower-bound curves for the (1|2,3) and (1|2,3,4) cuts plus the upper bound."""

    x: np.ndarray
    lower_a2a3: np.ndarray
    lower_a2a3a4: np.ndarray
    upper: float

    def rows(self) -> Iterator[tuple[float, float, float, float]]:
        for i in range(self.x.size):
            yield (float(self.x[i]), float(self.lower_a2a3[i]),
                   float(self.lower_a2a3a4[i]), self.upper)


def default_fig1_grid() -> np.ndarray:
    return np.round(np.arange(2.0, 14.0 + 1e-9, 0.1), 10)


def fig1_curves(params: WClassParams, x_grid: Sequence[float] | None = None) -> FigureTable:
    """Power-mean lower bounds (sum_j pair^x)^(1/x) against the purity bound.

    Requires n >= 4 so both pair groups {2,3} and {2,3,4} exist; every grid
    value must be >= 2.
    """
    if params.n < 4:
        raise ValueError(f"need n >= 4 for the (2,3,4) curve, got n={params.n}")
    grid = np.asarray(default_fig1_grid() if x_grid is None else list(x_grid), dtype=np.float64)
    if grid.size == 0 or np.any(grid < 2.0):
        raise DomainError("grid values must be >= 2")
    p2, p3, p4 = _pair_values(params, (2, 3, 4))

    def lb(terms, x):
        s = sum(t**x for t in terms)
        return s ** (1.0 / x) if s > 0.0 else 0.0

    lower23 = np.array([lb((p2, p3), x) for x in grid])
    lower234 = np.array([lb((p2, p3, p4), x) for x in grid])
    upper = _full_cut_concurrence(params)
    return FigureTable(x=grid, lower_a2a3=lower23, lower_a2a3a4=lower234, upper=upper)


def check_fig1_bounds(params: WClassParams, x_grid: Sequence[float] | None = None) -> MonogamyReport:
    """Verify the bound curves: non-increasing in x and below the upper bound."""
    table = fig1_curves(params, x_grid)
    gap = min(
        float(np.min(table.upper - table.lower_a2a3)),
        float(np.min(table.upper - table.lower_a2a3a4)),
    )
    monotone = (np.all(np.diff(table.lower_a2a3) <= 1e-12)
                and np.all(np.diff(table.lower_a2a3a4) <= 1e-12))
    ok = gap >= -TOL_CLOSED and bool(monotone)
    return MonogamyReport(
        inequality_id="FIG1_bounds",
        verdict=VERDICT_SATISFIED if ok else VERDICT_VIOLATED,
        satisfied=ok,
        lhs=float(max(np.max(table.lower_a2a3), np.max(table.lower_a2a3a4))),
        rhs=float(table.upper),
        residual=gap,
        tol=TOL_CLOSED,
        method="closed_form",
        n=params.n,
        notes="" if monotone else "lower-bound curve is not non-increasing",
    )


def run_query(query: MonogamyQuery, lhs_method: str = "closed_form",
              optimizer: dict | None = None) -> MonogamyReport:
    """Dispatch a single query to its checker."""
    params = query.params
    ineq = query.inequality_id
    subset = query.subset or tuple(range(1, params.n + 1))
    if ineq == "EQ4_concurrence":
        return residual_concurrence_power(params, query.exponent)
    if ineq == "EQ5_concurrence":
        return residual_concurrence_negative_power(params, query.exponent)
    if ineq == "EQ6_dual_coa":
        return check_dual_coa(params)
    if ineq == "TH1_coa_x":
        return check_coa_power(params, subset, query.exponent, lhs_method, optimizer)
    if ineq == "TH2_coa_y":
        return check_coa_negative_power(params, subset, query.exponent, lhs_method, optimizer)
    if ineq == "TH3_eof":
        return check_eof_pair_sum(params)
    if ineq == "TH4_eoa":
        return check_eoa_pair_sum(params, subset, optimizer)
    if ineq == "EQ13_eof_alpha":
        return check_eof_power(params, query.exponent)
    if ineq == "FIG1_bounds":
        return check_fig1_bounds(params)
    raise ValueError(f"unhandled inequality {ineq}")


def _subsets_for(params: WClassParams, mode, rng_seed=None) -> list[tuple[int, ...]]:
    n = params.n
    full = tuple(range(1, n + 1))
    if mode is None or mode == "full":
        return [full]
    if isinstance(mode, (tuple, list)):
        return [tuple(int(q) for q in mode)]
    if mode == "all" or mode == "proper":
        out = []
        for m in range(2, n + 1):
            if mode == "proper" and m == n:
                continue
            for others in combinations(range(2, n + 1), m - 1):
                out.append((1,) + others)
        return out
    if mode == "random":
        rng = np.random.default_rng(rng_seed)
        m = int(rng.integers(2, n + 1))
        others = rng.choice(np.arange(2, n + 1), size=m - 1, replace=False)
        return [(1,) + tuple(int(q) for q in sorted(others))]
    raise ValueError(f"unknown subset mode {mode!r}")


def _workers_from_env() -> int:
    raw = os.environ.get("MONOGAMY_THREADS", "").strip()
    if raw:
        return max(1, int(raw))
    return max(1, os.cpu_count() or 1)


def iter_campaign(inequality_id: str, samples: int, seed: int,
                  n_values: Sequence[int] = (3, 4, 5, 6),
                  exponent: float | None = None,
                  subset_mode="full",
                  allow_zero_a: bool = False,
                  lhs_method: str = "closed_form",
                  optimizer: dict | None = None,
                  workers: int | None = None) -> Iterator[MonogamyReport]:
    """Random-sample verification campaign, deterministic in ``seed``.

    Sample index i draws its parameters from the stream (seed, i) with
    n cycling through ``n_values``; reports come out ordered by sample
    index regardless of worker count.  Domain errors become domain_skipped
    reports rather than failures.
    """
    ineq = resolve_inequality_id(inequality_id)
    if exponent is None:
        exponent = _DEFAULT_EXPONENTS.get(ineq)

    def one_sample(idx: int) -> list[MonogamyReport]:
        n = int(n_values[idx % len(n_values)])
        params = sample_w_params(n, rng_seed=[seed, idx], allow_zero_a=allow_zero_a)
        subsets = _subsets_for(params, subset_mode, rng_seed=[seed, idx, 977])
        reports = []
        for sub in subsets:
            try:
                query = MonogamyQuery(params=params, inequality_id=ineq,
                                      subset=sub, exponent=exponent)
                rep = run_query(query, lhs_method=lhs_method, optimizer=optimizer)
            except DomainError as exc:
                rep = _skipped_report(ineq, params, str(exc), exponent=exponent, subset=sub)
            rep.seed = seed
            rep.sample_index = idx
            reports.append(rep)
        return reports

    nworkers = workers if workers is not None else _workers_from_env()
    if nworkers <= 1 or samples <= 1:
        for idx in range(samples):
            yield from one_sample(idx)
    else:
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            chunk = max(1, samples // (nworkers * 8))
            for reports in pool.map(one_sample, range(samples), chunksize=chunk):
                yield from reports


def summarize_reports(reports: Iterable[MonogamyReport]) -> dict:
    counts = {
        VERDICT_SATISFIED: 0,
        VERDICT_VIOLATED: 0,
        VERDICT_INCONCLUSIVE: 0,
        VERDICT_SKIPPED: 0,
    }
    total = 0
    for rep in reports:
        counts[rep.verdict] += 1
        total += 1
    counts["total"] = total
    return counts
