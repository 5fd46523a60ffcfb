"""Command-line interface: solve, verify, and bench subcommands.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical failure.  The maximum admissible level is capped by the
PREWAVELET_MAX_LEVEL environment variable (default 7).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import bench, linalg, mesh, prewavelet, quadrature, solver
from .homogenize import bilinear_lift, reconstruct

OK, VERIFY_FAILED, CONFIG_ERROR, NUMERICAL_FAILURE = 0, 1, 2, 3

_HARD_MAX_LEVEL = 12


class _ConfigError(Exception):
    pass


def _max_level() -> int:
    raw = os.environ.get("PREWAVELET_MAX_LEVEL", "7")
    try:
        cap = int(raw)
    except ValueError as exc:
        raise _ConfigError(f"PREWAVELET_MAX_LEVEL must be an integer, got {raw!r}") from exc
    return min(cap, _HARD_MAX_LEVEL)


def _check_level(level: int) -> int:
    cap = _max_level()
    if not (1 <= level <= cap):
        raise _ConfigError(
            f"level must lie in 1..{cap} (cap from PREWAVELET_MAX_LEVEL), got {level}"
        )
    return level


def _check_tol(tol: float) -> float:
    if not (0.0 < tol < 1.0):
        raise _ConfigError(f"tolerance must lie in (0, 1), got {tol}")
    return tol


def _rule(name: str) -> quadrature.TriangleRule:
    return quadrature.RULES[name]


def _load_problem_file(path: str):
    """Problem file: JSON with name, optional corner values, and a rhs.

    The rhs is either the name of a builtin right-hand side or an object
    {"values": [[...]]} of nodal samples on a (2^m + 1)^2 grid, interpolated
    piecewise-linearly.  Corner values [a1, a2, a3, a4] order the corners
    (0,0), (0,1), (1,1), (1,0); the boundary condition is their bilinear
    interpolant.
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
    except OSError as exc:
        raise _ConfigError(f"cannot read problem file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise _ConfigError(f"problem file {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise _ConfigError(f"problem file {path} must hold a JSON object")
    name = doc.get("name", os.path.basename(path))
    corners = doc.get("corners", [0.0, 0.0, 0.0, 0.0])
    if len(corners) != 4:
        raise _ConfigError("corners must be four numbers [a1, a2, a3, a4]")
    a1, a2, a3, a4 = (float(c) for c in corners)
    rhs = doc.get("rhs")
    builtins = bench.builtin_problems()
    if isinstance(rhs, str):
        if rhs not in builtins:
            raise _ConfigError(
                f"unknown builtin rhs {rhs!r}; choose one of {', '.join(sorted(builtins))}"
            )
        g = builtins[rhs].g
    elif isinstance(rhs, dict) and "values" in rhs:
        try:
            g = quadrature.TabulatedFunction(rhs["values"])
        except ValueError as exc:
            raise _ConfigError(f"bad tabulated rhs in {path}: {exc}") from exc
    else:
        raise _ConfigError(
            "rhs must be a builtin name or an object with nodal 'values'"
        )
    lift = bilinear_lift(a1, a2, a3, a4)
    return name, g, lift


def _cmd_solve(args: argparse.Namespace) -> int:
    level = _check_level(args.level)
    tol = _check_tol(args.tol)
    rule = _rule(args.quad)
    builtins = bench.builtin_problems()
    exact = None
    if args.problem in builtins:
        problem = builtins[args.problem]
        name, g, lift = problem.name, problem.g, None
        exact = problem
    elif args.problem.endswith(".json") or os.path.exists(args.problem):
        name, g, lift = _load_problem_file(args.problem)
    else:
        raise _ConfigError(
            f"unknown problem {args.problem!r}: pass a problem file or one of "
            f"{', '.join(sorted(builtins))}"
        )

    start = time.perf_counter()
    try:
        if args.method == "fem":
            coeffs = solver.fem_solve(level, g, rule=rule, solver=args.solver, tol=tol)
        else:
            ladder = solver.multilevel_solve(level, g, rule=rule, solver=args.solver, tol=tol)
            coeffs = ladder.prolong()
    except (linalg.NotPositiveDefiniteError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_FAILURE
    seconds = time.perf_counter() - start

    if lift is not None:
        coeffs = reconstruct(level, coeffs, lift)
    solver.export_solution_csv(args.out, level, coeffs)

    summary = (
        f"problem {name}: method {args.method}, solver {args.solver}, level {level}, "
        f"{mesh.n_interior(level)} unknowns, {seconds:.3f}s -> {args.out}"
    )
    if exact is not None:
        h1 = solver.h1_error(level, coeffs, exact.du_dx, exact.du_dy)
        l2 = solver.l2_error(level, coeffs, exact.u)
        summary += f", h1 error {h1:.6e}, l2 error {l2:.6e}"
    print(summary)
    return OK


def _print_check(name: str, passed: bool, detail: str) -> bool:
    print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
    return passed


def _cmd_verify(args: argparse.Namespace) -> int:
    level = _check_level(args.level)
    checks = ("orthogonality", "rank", "dimensions", "identity", "equivalence")
    wanted = checks if args.check == "all" else (args.check,)
    ok = True

    perturbed = {}
    if args.perturb:
        # test hook: corrupt one stencil entry and make sure the checks notice
        original = prewavelet.wavelet_matrix(args.perturb_level or 1)
        broken = original.tolil()
        broken[0, 0] += 1.0
        perturbed[args.perturb_level or 1] = broken.tocsr()

    def wavelet_matrix(j):
        return perturbed.get(j, prewavelet.wavelet_matrix(j))

    if "orthogonality" in wanted:
        from . import assembly

        for j in range(1, min(level, 6) + 1):
            r = assembly.cross_level_gram(j) @ wavelet_matrix(j).T
            worst = float(np.max(np.abs(r.toarray()))) if r.nnz else 0.0
            ok &= _print_check(
                f"orthogonality j={j}", worst <= 1e-12, f"max inner product {worst:.3e}"
            )
    if "rank" in wanted:
        for j in range(1, min(level, 4) + 1):
            mat = wavelet_matrix(j)
            expected = mesh.n_interior(j + 1) - mesh.n_interior(j)
            actual = int(np.linalg.matrix_rank(mat.toarray()))
            ok &= _print_check(
                f"rank j={j}",
                actual == expected and mat.shape[0] == expected,
                f"rank {actual}, expected {expected}",
            )
    if "dimensions" in wanted:
        j = min(level, 4)
        for n in range(1, 2**j):
            expected, actual = prewavelet.dimension_check(j, n)
            ok &= _print_check(
                f"dimensions j={j} n={n}", expected == actual, f"{actual} vs 3n^2-4n+1={expected}"
            )
    if "identity" in wanted:
        for j in range(1, min(level, 3) + 1):
            resid = solver.verify_identity(j)
            ok &= _print_check(f"identity j={j}", resid <= 1e-11, f"residual {resid:.3e}")
    if "equivalence" in wanted:
        g = bench.builtin_problems()["sine"].g
        for j in range(1, min(level, 5) + 1):
            ladder = solver.multilevel_solve(j + 1, g)
            direct = solver.fem_solve(j + 1, g)
            diff = float(np.max(np.abs(ladder.prolong() - direct)))
            scale = float(np.max(np.abs(direct)))
            rel = diff / scale if scale else diff
            ok &= _print_check(
                f"equivalence j={j}", rel <= 1e-9, f"relative difference {rel:.3e}"
            )
    return OK if ok else VERIFY_FAILED


def _cmd_bench(args: argparse.Namespace) -> int:
    levels = tuple(int(t) for t in args.levels.split(","))
    for level in levels:
        _check_level(level)
    builtins = bench.builtin_problems()
    names = [t.strip() for t in args.problems.split(",")]
    unknown = [n for n in names if n not in builtins]
    if unknown:
        raise _ConfigError(
            f"unknown problems {unknown}: choose from {', '.join(sorted(builtins))}"
        )
    problems = [builtins[n] for n in names]
    methods = ("fem", "prewavelet") if args.method == "both" else (args.method,)
    tolerances = ()
    if args.solver == "cg":
        tolerances = tuple(_check_tol(float(t)) for t in args.tolerances.split(","))
    records = bench.run_benchmark(
        problems=problems,
        levels=levels,
        methods=methods,
        solvers=(args.solver,),
        tolerances=tolerances,
        repetitions=args.reps,
        rule=_rule(args.quad),
    )
    if args.out:
        bench.write_csv(records, args.out)
        print(f"wrote {len(records)} records -> {args.out}")
    else:
        bench.write_csv(records, sys.stdout)
    for line in bench.speedup_summary(records):
        print(line)
    if any(np.isnan(r.total_s) for r in records):
        print("some combinations failed (NaN rows)", file=sys.stderr)
        return NUMERICAL_FAILURE
    return OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prewavelet-poisson",
        description="Poisson solver on the unit square with a prewavelet multiresolution ladder",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one problem and write the solution CSV")
    p_solve.add_argument("--level", type=int, required=True, help="refinement level")
    p_solve.add_argument(
        "--problem",
        default="sine",
        help="builtin problem name (sine, poly, exp) or a JSON problem file",
    )
    p_solve.add_argument("--method", choices=("fem", "prewavelet"), default="prewavelet")
    p_solve.add_argument("--solver", choices=("direct", "cg"), default="direct")
    p_solve.add_argument("--tol", type=float, default=1e-10, help="cg relative tolerance")
    p_solve.add_argument("--quad", choices=tuple(quadrature.RULES), default="mid3")
    p_solve.add_argument("--out", default="solution.csv", help="output CSV path")
    p_solve.set_defaults(fn=_cmd_solve)

    p_verify = sub.add_parser("verify", help="run the basis and solver property checks")
    p_verify.add_argument("--level", type=int, default=3, help="largest level to check")
    p_verify.add_argument(
        "--check",
        choices=("all", "orthogonality", "rank", "dimensions", "identity", "equivalence"),
        default="all",
    )
    p_verify.add_argument("--perturb", action="store_true", help=argparse.SUPPRESS)
    p_verify.add_argument("--perturb-level", type=int, default=None, help=argparse.SUPPRESS)
    p_verify.set_defaults(fn=_cmd_verify)

    p_bench = sub.add_parser("bench", help="run the timing harness and write CSV records")
    p_bench.add_argument("--levels", default="4,5,6", help="comma-separated levels")
    p_bench.add_argument("--problems", default="sine,poly,exp", help="comma-separated names")
    p_bench.add_argument("--method", choices=("fem", "prewavelet", "both"), default="both")
    p_bench.add_argument("--solver", choices=("direct", "cg"), default="direct")
    p_bench.add_argument(
        "--tolerances", default="1e-8", help="comma-separated cg tolerances (cg only)"
    )
    p_bench.add_argument("--reps", type=int, default=3, help="timed repetitions per combination")
    p_bench.add_argument("--quad", choices=tuple(quadrature.RULES), default="mid3")
    p_bench.add_argument("--out", default=None, help="output CSV path (default: stdout)")
    p_bench.set_defaults(fn=_cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except _ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
