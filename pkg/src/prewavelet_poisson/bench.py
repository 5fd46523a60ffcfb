"""Built-in test problems and the timing harness.

Timed passes rebuild everything from scratch (caches cleared), separate
assembly from solve time, and take medians over repetitions after one
discarded warm-up pass.  The prewavelet method is timed cumulatively over
its whole ladder, construction included, because that is how the
multiresolution sweep is used; errors are measured afterwards, outside the
timed region, with the degree-5 rule.  A failed solve is recorded with NaN
in the timing and error fields rather than aborting the sweep.
"""

from __future__ import annotations

import concurrent.futures
import csv
import math
import statistics
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import assembly, linalg, mesh, prewavelet, quadrature, solver


@dataclass(frozen=True)
class TestProblem:
    """Manufactured problem with known solution and derivatives."""

    name: str
    u: Callable
    du_dx: Callable
    du_dy: Callable
    g: Callable


def _sine() -> TestProblem:
    two_pi = 2.0 * np.pi
    return TestProblem(
        name="sine",
        u=lambda x, y: np.sin(two_pi * x) * np.sin(two_pi * y),
        du_dx=lambda x, y: two_pi * np.cos(two_pi * x) * np.sin(two_pi * y),
        du_dy=lambda x, y: two_pi * np.sin(two_pi * x) * np.cos(two_pi * y),
        g=lambda x, y: 8.0 * np.pi**2 * np.sin(two_pi * x) * np.sin(two_pi * y),
    )


def _poly() -> TestProblem:
    return TestProblem(
        name="poly",
        u=lambda x, y: x * (1.0 - x) * y * (1.0 - y),
        du_dx=lambda x, y: (1.0 - 2.0 * x) * y * (1.0 - y),
        du_dy=lambda x, y: x * (1.0 - x) * (1.0 - 2.0 * y),
        g=lambda x, y: 2.0 * x * (1.0 - x) + 2.0 * y * (1.0 - y),
    )


def _exp() -> TestProblem:
    def u(x, y):
        return x * y * (1.0 - x) * (1.0 - y) * np.exp(8.0 * x * y)

    def du_dx(x, y):
        p = x * (1.0 - x) * y * (1.0 - y)
        px = (1.0 - 2.0 * x) * y * (1.0 - y)
        return (px + 8.0 * y * p) * np.exp(8.0 * x * y)

    def du_dy(x, y):
        p = x * (1.0 - x) * y * (1.0 - y)
        py = x * (1.0 - x) * (1.0 - 2.0 * y)
        return (py + 8.0 * x * p) * np.exp(8.0 * x * y)

    def g(x, y):
        p = x * (1.0 - x) * y * (1.0 - y)
        px = (1.0 - 2.0 * x) * y * (1.0 - y)
        py = x * (1.0 - x) * (1.0 - 2.0 * y)
        pxx = -2.0 * y * (1.0 - y)
        pyy = -2.0 * x * (1.0 - x)
        return -np.exp(8.0 * x * y) * (
            pxx + pyy + 16.0 * y * px + 16.0 * x * py + 64.0 * (x**2 + y**2) * p
        )

    return TestProblem(name="exp", u=u, du_dx=du_dx, du_dy=du_dy, g=g)


def builtin_problems() -> dict[str, TestProblem]:
    """The three manufactured problems: sine, poly, exp."""
    problems = (_sine(), _poly(), _exp())
    return {p.name: p for p in problems}


CSV_HEADER = (
    "problem,method,solver,level,tolerance,unknowns,"
    "assemble_s,solve_s,total_s,h1_error,l2_error"
)


@dataclass
class BenchRecord:
    """One benchmark combination; tolerance is None for direct solves."""

    problem: str
    method: str
    solver: str
    level: int
    tolerance: float | None
    unknowns: int
    assemble_s: float
    solve_s: float
    total_s: float
    h1_error: float
    l2_error: float


def write_csv(records: list[BenchRecord], f) -> None:
    """Serialize records under the fixed CSV schema; floats via repr."""
    own = isinstance(f, (str, bytes)) or hasattr(f, "__fspath__")
    out = open(f, "w", newline="", encoding="utf-8") if own else f
    try:
        writer = csv.writer(out)
        writer.writerow(CSV_HEADER.split(","))
        for r in records:
            writer.writerow(
                [
                    r.problem,
                    r.method,
                    r.solver,
                    r.level,
                    "" if r.tolerance is None else repr(r.tolerance),
                    r.unknowns,
                    repr(r.assemble_s),
                    repr(r.solve_s),
                    repr(r.total_s),
                    repr(r.h1_error),
                    repr(r.l2_error),
                ]
            )
    finally:
        if own:
            out.close()


def read_csv(f) -> list[BenchRecord]:
    """Parse records written by :func:`write_csv`."""
    own = isinstance(f, (str, bytes)) or hasattr(f, "__fspath__")
    src = open(f, "r", newline="", encoding="utf-8") if own else f
    try:
        reader = csv.reader(src)
        header = next(reader)
        if header != CSV_HEADER.split(","):
            raise ValueError(f"unexpected header {header!r}")
        out = []
        for row in reader:
            out.append(
                BenchRecord(
                    problem=row[0],
                    method=row[1],
                    solver=row[2],
                    level=int(row[3]),
                    tolerance=None if row[4] == "" else float(row[4]),
                    unknowns=int(row[5]),
                    assemble_s=float(row[6]),
                    solve_s=float(row[7]),
                    total_s=float(row[8]),
                    h1_error=float(row[9]),
                    l2_error=float(row[10]),
                )
            )
        return out
    finally:
        if own:
            src.close()


def _clear_caches() -> None:
    assembly.refinement_matrix.cache_clear()
    assembly.stiffness_matrix.cache_clear()
    assembly.cross_level_gram.cache_clear()
    prewavelet._basis.cache_clear()
    prewavelet.wavelet_matrix.cache_clear()
    prewavelet.wavelet_gram.cache_clear()
    solver._stiffness_factor.cache_clear()
    solver._detail_factor.cache_clear()


def _fem_pass(problem, level, solver_name, tol, rule):
    _clear_caches()
    t0 = time.perf_counter()
    a = assembly.stiffness_matrix(level)
    rhs = quadrature.load_vector(level, problem.g, rule)
    t1 = time.perf_counter()
    if solver_name == "direct":
        coeffs = linalg.CholeskyFactor(a).solve(rhs)
    else:
        coeffs, report = linalg.cg_solve(a, rhs, tol=tol)
        if not report.converged:
            raise RuntimeError("cg did not converge")
    t2 = time.perf_counter()
    return t1 - t0, t2 - t1, coeffs


def _prewavelet_pass(problem, level, solver_name, tol, rule):
    _clear_caches()
    t0 = time.perf_counter()
    rhs = quadrature.load_vector(level, problem.g, rule)
    loads = {level: rhs}
    for j in range(level - 1, 0, -1):
        loads[j] = assembly.refinement_matrix(j) @ loads[j + 1]
    coarse_mat = assembly.stiffness_matrix(1)
    detail_mats = [prewavelet.wavelet_gram(j) for j in range(1, level)]
    detail_rhs = [prewavelet.wavelet_matrix(j) @ loads[j + 1] for j in range(1, level)]
    t1 = time.perf_counter()

    def solve(mat, b):
        if solver_name == "direct":
            return linalg.CholeskyFactor(mat).solve(b)
        x, report = linalg.cg_solve(mat, b, tol=tol)
        if not report.converged:
            raise RuntimeError("cg did not converge")
        return x

    coeffs = solve(coarse_mat, loads[1])
    for j in range(1, level):
        detail = solve(detail_mats[j - 1], detail_rhs[j - 1])
        coeffs = (
            assembly.refinement_matrix(j).T @ coeffs
            + prewavelet.wavelet_matrix(j).T @ detail
        )
    t2 = time.perf_counter()
    return t1 - t0, t2 - t1, coeffs


_PASSES = {"fem": _fem_pass, "prewavelet": _prewavelet_pass}


def _run_combo(problem, level, method, solver_name, tol, rule, repetitions):
    run = _PASSES[method]
    try:
        run(problem, level, solver_name, tol, rule)  # warm-up, discarded
        assemble, solve_t, total = [], [], []
        coeffs = None
        for _ in range(repetitions):
            a_s, s_s, coeffs = run(problem, level, solver_name, tol, rule)
            assemble.append(a_s)
            solve_t.append(s_s)
            total.append(a_s + s_s)
        h1 = solver.h1_error(level, coeffs, problem.du_dx, problem.du_dy)
        l2 = solver.l2_error(level, coeffs, problem.u)
        return BenchRecord(
            problem=problem.name,
            method=method,
            solver=solver_name,
            level=level,
            tolerance=None if solver_name == "direct" else tol,
            unknowns=mesh.n_interior(level),
            assemble_s=statistics.median(assemble),
            solve_s=statistics.median(solve_t),
            total_s=statistics.median(total),
            h1_error=h1,
            l2_error=l2,
        )
    except (linalg.NotPositiveDefiniteError, RuntimeError):
        nan = float("nan")
        return BenchRecord(
            problem=problem.name,
            method=method,
            solver=solver_name,
            level=level,
            tolerance=None if solver_name == "direct" else tol,
            unknowns=mesh.n_interior(level),
            assemble_s=nan,
            solve_s=nan,
            total_s=nan,
            h1_error=nan,
            l2_error=nan,
        )


def run_benchmark(
    problems: list[TestProblem] | None = None,
    levels: tuple[int, ...] = (4, 5, 6),
    methods: tuple[str, ...] = ("fem", "prewavelet"),
    solvers: tuple[str, ...] = ("direct",),
    tolerances: tuple[float, ...] = (),
    repetitions: int = 3,
    rule: quadrature.TriangleRule = quadrature.MID3,
    parallel: bool = False,
) -> list[BenchRecord]:
    """Time every combination and return one record each.

    Combinations are problems x levels x methods x solver settings, where
    direct contributes one setting and cg one per tolerance.  Sequential by
    default; ``parallel`` fans combinations out to a thread pool, which is
    useful for correctness sweeps but makes timings meaningless.
    """
    if problems is None:
        problems = list(builtin_problems().values())
    if repetitions < 1:
        raise ValueError(f"repetitions must be >= 1, got {repetitions}")
    settings = []
    for s in solvers:
        if s == "direct":
            settings.append(("direct", None))
        elif s == "cg":
            if not tolerances:
                raise ValueError("cg benchmarking needs at least one tolerance")
            settings.extend(("cg", t) for t in tolerances)
        else:
            raise ValueError(f"solver must be 'direct' or 'cg', got {s!r}")
    combos = [
        (p, level, m, s, t)
        for p in problems
        for level in levels
        for m in methods
        for (s, t) in settings
    ]
    for _, level, m, _, _ in combos:
        if m not in _PASSES:
            raise ValueError(f"method must be one of {sorted(_PASSES)}, got {m!r}")
        if level < 1:
            raise ValueError(f"level must be >= 1, got {level}")
    if parallel:
        with concurrent.futures.ThreadPoolExecutor() as pool:
            futures = [
                pool.submit(_run_combo, p, level, m, s, t, rule, repetitions)
                for (p, level, m, s, t) in combos
            ]
            records = [f.result() for f in futures]
    else:
        records = [
            _run_combo(p, level, m, s, t, rule, repetitions)
            for (p, level, m, s, t) in combos
        ]
    _clear_caches()
    return records


def speedup_summary(records: list[BenchRecord]) -> list[str]:
    """Direct-FEM vs cumulative-prewavelet total time per problem and level."""
    lines = []
    by_key = {}
    for r in records:
        by_key[(r.problem, r.level, r.method, r.solver, r.tolerance)] = r
    seen = sorted({(r.problem, r.level, r.solver, r.tolerance) for r in records})
    for problem, level, solver_name, tol in seen:
        fem = by_key.get((problem, level, "fem", solver_name, tol))
        pre = by_key.get((problem, level, "prewavelet", solver_name, tol))
        if fem is None or pre is None:
            continue
        ratio = fem.total_s / pre.total_s if pre.total_s else math.inf
        lines.append(
            f"{problem} level {level} ({solver_name}): "
            f"fem {fem.total_s:.6f}s / prewavelet {pre.total_s:.6f}s = {ratio:.3f}"
        )
    return lines
