"""Command-line workbench.

Commands: ``verify`` (inequality campaigns and single-state checks),
``figure`` (bound-curve CSV), ``roof`` (one roof solve), ``sample``
(emit random parameters) and ``selftest`` (reduced invariant sweep).
Exit codes: 0 all satisfied or inconclusive-safe, 1 violation or selftest
failure, 2 usage or input error.

Every sampling command requires an explicit --seed; there is no wall-clock
default, so identical invocations produce byte-identical outputs.  The
MONOGAMY_THREADS environment variable caps campaign workers and
MONOGAMY_BACKEND selects the numba or numpy kernel path.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import monogamy, roof, wstates
from .linalg import DensityMatrix

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2


def _err(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_USAGE


def _parse_int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.replace(" ", "").split(",") if tok]


def _load_params(args) -> wstates.WClassParams:
    if getattr(args, "paper_example", False):
        return wstates.example_five_qubit_params()
    return wstates.read_state_json(args.state)


def _pick_exponent(args):
    for name in ("x", "y", "alpha"):
        val = getattr(args, name, None)
        if val is not None:
            return float(val)
    return None


def _subset_mode(raw: str | None):
    if raw is None or raw == "full":
        return "full"
    if raw in ("all", "proper", "random"):
        return raw
    return tuple(_parse_int_list(raw))


def _optimizer_opts(args) -> dict:
    opts = {}
    if getattr(args, "starts", None) is not None:
        opts["starts"] = args.starts
    if getattr(args, "rmax", None) is not None:
        opts["r_max"] = args.rmax
    if getattr(args, "tol", None) is not None:
        opts["tol"] = args.tol
    if getattr(args, "seed", None) is not None:
        opts["seed"] = args.seed
    return opts


def cmd_sample(args) -> int:
    if args.seed is None:
        return _err("--seed is required for sampling")
    count = args.random
    if count < 1:
        return _err("--random must be >= 1")
    if count == 1:
        params = wstates.sample_w_params(args.n, rng_seed=args.seed,
                                         allow_zero_a=args.allow_zero_a)
        payload = json.dumps(wstates.params_to_dict(params), indent=2, sort_keys=True) + "\n"
    else:
        lines = []
        for idx in range(count):
            params = wstates.sample_w_params(args.n, rng_seed=[args.seed, idx],
                                             allow_zero_a=args.allow_zero_a)
            lines.append(json.dumps(wstates.params_to_dict(params),
                                    sort_keys=True, separators=(",", ":")))
        payload = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        ineq = monogamy.resolve_inequality_id(args.ineq)
    except ValueError as exc:
        return _err(str(exc))
    if args.format not in ("jsonl", "json"):
        return _err("verify supports --format jsonl or json")
    exponent = _pick_exponent(args)
    subset_mode = _subset_mode(args.subset)
    optimizer = _optimizer_opts(args) or None
    lhs_method = args.lhs_method

    if args.random is not None:
        if args.seed is None:
            return _err("--seed is required with --random")
        n_values = _parse_int_list(args.n) if args.n else [3, 4, 5, 6]
        if any(n < 2 for n in n_values):
            return _err("--n values must be >= 2")
        reports = monogamy.iter_campaign(
            ineq, samples=args.random, seed=args.seed, n_values=n_values,
            exponent=exponent, subset_mode=subset_mode,
            allow_zero_a=args.allow_zero_a, lhs_method=lhs_method,
            optimizer=optimizer, workers=args.workers,
        )
    else:
        try:
            params = _load_params(args)
        except FileNotFoundError as exc:
            return _err(str(exc))
        except (ValueError, KeyError) as exc:
            return _err(f"bad state file: {exc}")

        def single():
            for sub in monogamy._subsets_for(params, subset_mode, rng_seed=args.seed or 0):
                try:
                    query = monogamy.MonogamyQuery(params=params, inequality_id=ineq,
                                                   subset=sub, exponent=exponent)
                    yield monogamy.run_query(query, lhs_method=lhs_method, optimizer=optimizer)
                except monogamy.DomainError as exc:
                    yield monogamy._skipped_report(ineq, params, str(exc),
                                                   exponent=exponent, subset=sub)

        reports = single()

    counts = {k: 0 for k in ("satisfied", "violated", "inconclusive", "domain_skipped")}
    out_fh = open(args.out, "w", encoding="utf-8") if args.out else None
    collected = [] if (out_fh and args.format == "json") else None
    try:
        for rep in reports:
            counts[rep.verdict] += 1
            if out_fh is not None:
                if collected is not None:
                    collected.append(rep.to_dict())
                else:
                    out_fh.write(monogamy.report_json_line(rep) + "\n")
        if collected is not None:
            json.dump(collected, out_fh, sort_keys=True, separators=(",", ":"))
            out_fh.write("\n")
    finally:
        if out_fh is not None:
            out_fh.close()
    counts["total"] = sum(counts.values())
    print(json.dumps(counts, sort_keys=True))
    return EXIT_VIOLATION if counts["violated"] else EXIT_OK


def cmd_figure(args) -> int:
    if args.format != "csv":
        return _err("figure emits CSV only")
    try:
        params = _load_params(args)
    except FileNotFoundError as exc:
        return _err(str(exc))
    except (ValueError, KeyError) as exc:
        return _err(f"bad state file: {exc}")
    if args.x_min < 2 or args.x_max < args.x_min or args.x_step <= 0:
        return _err("need 2 <= x-min <= x-max and a positive x-step")
    grid = np.round(np.arange(args.x_min, args.x_max + 1e-9, args.x_step), 10)
    try:
        table = monogamy.fig1_curves(params, grid)
    except (ValueError, monogamy.DomainError) as exc:
        return _err(str(exc))
    lines = ["x,lower_A2A3,lower_A2A3A4,upper"]
    for x, lo23, lo234, up in table.rows():
        lines.append(f"{round(x, 10)!r},{lo23:.4f},{lo234:.4f},{up:.4f}")
    payload = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)
    return EXIT_OK


def _load_rho(path) -> DensityMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    matrix = np.array([[complex(re, im) for re, im in row] for row in data["matrix"]])
    return DensityMatrix(qubits=tuple(data["qubits"]), matrix=matrix)


def cmd_roof(args) -> int:
    try:
        if args.rho:
            rho = _load_rho(args.rho)
        else:
            params = _load_params(args)
            subset = _parse_int_list(args.subset) if args.subset else list(range(1, params.n + 1))
            rho = wstates.reduced_subset(params, subset)
    except FileNotFoundError as exc:
        return _err(str(exc))
    except (ValueError, KeyError) as exc:
        return _err(f"bad input: {exc}")
    try:
        problem = roof.RoofProblem(
            rho=rho,
            functional=args.functional,
            direction=args.direction,
            cut=tuple(_parse_int_list(args.cut)) if args.cut else (),
            r_max=args.rmax,
            starts=args.starts if args.starts is not None else 32,
            tol=args.tol if args.tol is not None else 1e-7,
            seed=args.seed if args.seed is not None else 0,
        )
        solution = roof.solve_roof(problem)
    except ValueError as exc:
        return _err(str(exc))
    print(f"value = {solution.value:.12f}  ({solution.bound_direction}, "
          f"converged={solution.converged}, ensemble size {solution.ensemble.size})")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(roof.solution_to_dict(solution), fh, sort_keys=True)
            fh.write("\n")
    return EXIT_OK


class SelftestFailure(AssertionError):
    pass


def _st_close(a, b, tol, label):
    if not abs(a - b) <= tol:
        raise SelftestFailure(f"{label}: |{a!r} - {b!r}| > {tol}")


def _suite_core(samples, seed, tol):
    from .linalg import hermitian_eig, ket_from_amplitudes, partial_trace, density_of, psd_sqrt

    tol = 1e-8 if tol is None else tol
    rng = np.random.default_rng(seed)
    for trial in range(max(10, samples // 10)):
        n = int(rng.integers(2, 6))
        vec = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
        rho = density_of(ket_from_amplitudes(vec))
        keep = sorted(rng.choice(np.arange(1, n + 1), size=max(1, n - 2), replace=False))
        step1 = partial_trace(rho, list(range(1, n + 1))[: max(1, n - 1)])
        step2 = partial_trace(step1, [q for q in keep if q <= max(1, n - 1)] or [1])
        joint = partial_trace(rho, step2.qubits)
        if np.max(np.abs(step2.matrix - joint.matrix)) > max(tol, 0.0):
            raise SelftestFailure(f"partial trace composition (seed={seed}, trial={trial})")
        spec = hermitian_eig(rho)
        _st_close(float(spec.eigenvalues.sum()), 1.0, max(tol, 1e-10),
                  f"eigenvalue sum (seed={seed}, trial={trial})")
    for trial in range(samples):
        d = int(rng.integers(2, 9))
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        m = a @ a.conj().T
        m /= np.trace(m).real
        s = psd_sqrt(m)
        if np.max(np.abs(s @ s - m)) > max(tol, 1e-8):
            raise SelftestFailure(f"psd_sqrt roundtrip (seed={seed}, trial={trial})")


def _suite_wstates(samples, seed, tol):
    from .linalg import density_of, partial_trace

    tol = 1e-10 if tol is None else tol
    rng = np.random.default_rng(seed)
    for trial in range(max(20, samples // 20)):
        n = int(rng.integers(3, 7))
        params = wstates.sample_w_params(n, rng_seed=[seed, trial])
        rho_full = density_of(wstates.build_w_state(params))
        i = int(rng.integers(2, n + 1))
        direct = wstates.reduced_pair(params, i)
        traced = partial_trace(rho_full, (1, i))
        if np.max(np.abs(direct.matrix - traced.matrix)) > max(tol, 1e-12):
            raise SelftestFailure(f"pair reduction mismatch (seed={seed}, trial={trial})")
        support = wstates.rank_two_support(params, i)
        if np.max(np.abs(support.density() - direct.matrix)) > max(tol, 1e-10):
            raise SelftestFailure(f"support reconstruction (seed={seed}, trial={trial})")
        subset = sorted({1, i, int(rng.integers(2, n + 1))})
        split = wstates.w_plus_vacuum_split(wstates.reduced_subset(params, subset))
        traced_mass = sum(abs(params.b[q - 1]) ** 2
                          for q in range(1, n + 1) if q not in subset)
        _st_close(split.weight_vac, traced_mass, max(tol, 1e-12),
                  f"vacuum weight (seed={seed}, trial={trial})")


def _suite_pair_values(samples, seed, tol):
    from .measures import coa_mixed_2q, concurrence_mixed_2q

    tol = 1e-9 if tol is None else tol
    rng = np.random.default_rng(seed)
    for trial in range(samples):
        n = int(rng.integers(3, 7))
        params = wstates.sample_w_params(n, rng_seed=[seed, trial],
                                         allow_zero_a=bool(trial % 5 == 0))
        i = int(rng.integers(2, n + 1))
        target = monogamy.pair_value_w(params, i).value
        rho = wstates.reduced_pair(params, i)
        _st_close(concurrence_mixed_2q(rho).value, target, tol,
                  f"pair concurrence (seed={seed}, trial={trial})")
        _st_close(coa_mixed_2q(rho).value, target, tol,
                  f"pair assistance (seed={seed}, trial={trial})")


def _suite_measures(samples, seed, tol):
    from .measures import concurrence_pure, eof_pure, f_of_c2

    tol = 1e-10 if tol is None else tol
    for trial in range(samples):
        n = 3 + trial % 4
        params = wstates.sample_w_params(n, rng_seed=[seed, trial])
        state = wstates.build_w_state(params)
        c = concurrence_pure(state, [1]).value
        _st_close(eof_pure(state, [1]).value, f_of_c2(c * c), tol,
                  f"entropy vs f(C^2) (seed={seed}, trial={trial})")
    grid = np.arange(0.0, 1.0 + 1e-12, 0.01)
    for x in grid:
        for y in grid:
            if x + y <= 1.0 and f_of_c2(x + y) > f_of_c2(x) + f_of_c2(y) + max(tol, 1e-12):
                raise SelftestFailure(f"subadditivity fails at ({x:.2f}, {y:.2f})")


def _suite_roof(samples, seed, tol):
    from .measures import coa_mixed_2q, eof_mixed_2q
    from .linalg import partial_trace, density_of, ket_from_amplitudes

    tol = 1e-4 if tol is None else tol
    count = max(3, samples // 60)
    rng = np.random.default_rng(seed)
    for trial in range(count):
        vec = rng.normal(size=8) + 1j * rng.normal(size=8)
        rho = partial_trace(density_of(ket_from_amplitudes(vec)), (1, 2))
        sol_min = roof.solve_roof(roof.RoofProblem(rho=rho, functional="entropy",
                                                   direction="min", cut=(1,),
                                                   starts=16, seed=seed))
        _st_close(sol_min.value, eof_mixed_2q(rho).value, tol,
                  f"roof-min formation (seed={seed}, trial={trial})")
        sol_max = roof.solve_roof(roof.RoofProblem(rho=rho, functional="concurrence",
                                                   direction="max", cut=(1,),
                                                   starts=16, seed=seed))
        _st_close(sol_max.value, coa_mixed_2q(rho).value, tol,
                  f"roof-max assistance (seed={seed}, trial={trial})")


def _suite_inequalities(samples, seed, tol):
    tol = None if tol is None else tol
    specs = [
        ("EQ4_concurrence", dict(exponent=3.0)),
        ("EQ5_concurrence", dict(exponent=-1.0)),
        ("EQ6_dual_coa", {}),
        ("TH1_coa_x", dict(exponent=2.0, subset_mode="all")),
        ("TH2_coa_y", dict(exponent=-2.0, subset_mode="all")),
        ("TH3_eof", {}),
        ("EQ13_eof_alpha", {}),
    ]
    count = max(20, samples // 5)
    for ineq, extra in specs:
        counts = monogamy.summarize_reports(
            monogamy.iter_campaign(ineq, samples=count, seed=seed, **extra)
        )
        if counts["violated"]:
            raise SelftestFailure(f"{ineq}: {counts['violated']} violations (seed={seed})")
    counts = monogamy.summarize_reports(
        monogamy.iter_campaign("TH4_eoa", samples=3, seed=seed, subset_mode="random")
    )
    if counts["violated"]:
        raise SelftestFailure(f"TH4_eoa: violations (seed={seed})")
    if tol is not None and tol <= 0.0:
        raise SelftestFailure(f"tolerance {tol} rejects all comparisons (seed={seed})")


def _suite_figure(samples, seed, tol):
    params = wstates.example_five_qubit_params()
    rep = monogamy.check_fig1_bounds(params)
    if rep.verdict != "satisfied":
        raise SelftestFailure(f"figure bounds (seed={seed}): {rep.notes}")


_SUITES = {
    "core": _suite_core,
    "wstates": _suite_wstates,
    "pair_values": _suite_pair_values,
    "measures": _suite_measures,
    "roof": _suite_roof,
    "inequalities": _suite_inequalities,
    "figure": _suite_figure,
}


def cmd_selftest(args) -> int:
    names = [args.suite] if args.suite else list(_SUITES)
    unknown = [n for n in names if n not in _SUITES]
    if unknown:
        return _err(f"unknown suite(s) {unknown}; available: {', '.join(_SUITES)}")
    seed = args.seed if args.seed is not None else 0
    samples = args.samples if args.samples is not None else 200
    failures = 0
    for name in names:
        start = time.perf_counter()
        try:
            _SUITES[name](samples, seed, args.tol)
            elapsed = time.perf_counter() - start
            print(f"[PASS] {name} ({elapsed:.2f}s)")
        except (SelftestFailure, AssertionError, ValueError) as exc:
            elapsed = time.perf_counter() - start
            print(f"[FAIL] {name} ({elapsed:.2f}s): {exc}")
            failures += 1
    return EXIT_VIOLATION if failures else EXIT_OK


def _add_state_source(sub, with_random=False):
    sub.add_argument("--state", help="state JSON file")
    sub.add_argument("--paper-example", action="store_true",
                     help="use the built-in five-qubit demo state")
    if with_random:
        sub.add_argument("--random", type=int, default=None,
                         help="number of random samples to draw")
        sub.add_argument("--allow-zero-a", action="store_true",
                         help="sample with the vacuum amplitude pinned to zero")


def _add_optimizer_flags(sub):
    sub.add_argument("--starts", type=int, default=None, help="multi-start count")
    sub.add_argument("--rmax", type=int, default=None, help="ensemble size cap")
    sub.add_argument("--tol", type=float, default=None, help="convergence tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wmonogamy", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    subs = parser.add_subparsers(dest="command")

    p = subs.add_parser("sample", help="emit random W-class parameters")
    p.add_argument("--n", type=int, required=True, help="qubit count")
    p.add_argument("--seed", type=int, default=None, required=False)
    p.add_argument("--random", type=int, default=1, help="how many draws (JSONL if > 1)")
    p.add_argument("--allow-zero-a", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sample)

    p = subs.add_parser("verify", help="check one inequality on states")
    p.add_argument("--ineq", required=True, help="inequality id (eq4, eq5, eq6, th1, th2, th3, th4, eq13, fig1)")
    _add_state_source(p, with_random=True)
    p.add_argument("--n", default=None, help="qubit count(s) for --random, e.g. 4 or 3,4,5,6")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--x", type=float, default=None, help="exponent for eq4/th1")
    p.add_argument("--y", type=float, default=None, help="exponent for eq5/th2")
    p.add_argument("--alpha", type=float, default=None, help="exponent for eq13")
    p.add_argument("--subset", default=None,
                   help="comma list like 1,2,3 or one of full/proper/all/random")
    p.add_argument("--lhs-method", choices=("closed_form", "roof"), default="closed_form")
    p.add_argument("--workers", type=int, default=None)
    _add_optimizer_flags(p)
    p.add_argument("--out", default=None, help="report file (JSONL)")
    p.add_argument("--format", choices=("csv", "json", "jsonl"), default="jsonl")
    p.set_defaults(func=cmd_verify)

    p = subs.add_parser("figure", help="emit the bound-curve CSV")
    _add_state_source(p)
    p.add_argument("--x-min", type=float, default=2.0)
    p.add_argument("--x-max", type=float, default=14.0)
    p.add_argument("--x-step", type=float, default=0.1)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json", "jsonl"), default="csv")
    p.set_defaults(func=cmd_figure)

    p = subs.add_parser("roof", help="solve one convex-roof problem")
    _add_state_source(p)
    p.add_argument("--rho", default=None, help="density matrix JSON file")
    p.add_argument("--subset", default=None, help="reduce the state to these qubits first")
    p.add_argument("--cut", default=None, help="cut side A labels, default first qubit")
    p.add_argument("--functional", choices=("concurrence", "entropy"), default="concurrence")
    p.add_argument("--direction", choices=("min", "max"), default="min")
    p.add_argument("--seed", type=int, default=None)
    _add_optimizer_flags(p)
    p.add_argument("--out", default=None, help="solution JSON file")
    p.set_defaults(func=cmd_roof)

    p = subs.add_parser("selftest", help="run the reduced invariant sweep")
    p.add_argument("--suite", default=None, help=f"one of: {', '.join(_SUITES)}")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tol", type=float, default=None, help="override comparison tolerance")
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_help()
        return EXIT_USAGE
    if getattr(args, "state", None) is None and not getattr(args, "paper_example", False):
        if args.func is cmd_verify and args.random is None:
            return _err("need --state, --paper-example or --random N")
        if args.func in (cmd_figure,):
            return _err("need --state or --paper-example")
        if args.func is cmd_roof and not getattr(args, "rho", None):
            return _err("need --state, --paper-example or --rho")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
