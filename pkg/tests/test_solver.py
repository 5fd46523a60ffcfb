"""Solver tests: direct FEM, the multiresolution ladder, and error norms."""

import io

import numpy as np
import pytest

from prewavelet_poisson import assembly, bench, linalg, mesh, prewavelet, quadrature, solver


def test_single_vertex_frozen_value():
    # j=1: one unknown, 4 u = 1/4, so u(1/2, 1/2) = 1/16
    c = solver.fem_solve(1, lambda x, y: np.ones_like(x))
    assert c.shape == (1,)
    assert c[0] == pytest.approx(1.0 / 16.0, rel=1e-14)


def test_fem_solves_the_galerkin_system():
    # residual of the assembled system is at solver precision
    g = bench.builtin_problems()["exp"].g
    j = 3
    c = solver.fem_solve(j, g)
    a = assembly.stiffness_matrix(j)
    f = quadrature.load_vector(j, g)
    assert np.linalg.norm(a @ c - f) / np.linalg.norm(f) <= 1e-12


def test_wavelet_solve_system_residual():
    g = bench.builtin_problems()["sine"].g
    j = 2
    b = solver.wavelet_solve(j, g)
    e = prewavelet.wavelet_gram(j)
    rhs = quadrature.wavelet_load(j, quadrature.load_vector(j + 1, g))
    assert np.linalg.norm(e @ b - rhs) / np.linalg.norm(rhs) <= 1e-12


@pytest.mark.parametrize("problem", ("sine", "poly", "exp"))
def test_two_level_split_reproduces_fine_solution(problem):
    # u_{j+1} = u_j + w_j after prolongation, the central decomposition
    g = bench.builtin_problems()[problem].g
    for top in (2, 3, 4):
        direct = solver.fem_solve(top, g)
        ladder = solver.multilevel_solve(top, g)
        rec = ladder.prolong()
        rel = np.max(np.abs(rec - direct)) / np.max(np.abs(direct))
        assert rel <= 1e-11


def test_multilevel_structure():
    g = bench.builtin_problems()["poly"].g
    ml = solver.multilevel_solve(4, g, base_level=2)
    assert ml.base_level == 2
    assert ml.top_level == 4
    assert ml.coarse.shape == (mesh.n_interior(2),)
    assert len(ml.details) == 2
    for j, d in zip((2, 3), ml.details):
        assert d.shape == (mesh.n_interior(j + 1) - mesh.n_interior(j),)


def test_prolong_to_intermediate_level():
    # the intermediate ladder value is the level-3 Galerkin solution for the
    # load restricted from the finest level, not for level-3 quadrature of g
    g = bench.builtin_problems()["sine"].g
    ml = solver.multilevel_solve(4, g)
    mid = ml.prolong(level=3)
    assert mid.shape == (mesh.n_interior(3),)
    f4 = quadrature.load_vector(4, g)
    f3 = assembly.refinement_matrix(3) @ f4
    direct, _ = linalg.cholesky_solve(assembly.stiffness_matrix(3), f3)
    assert np.max(np.abs(mid - direct)) / np.max(np.abs(direct)) <= 1e-11


def test_truncating_details_is_exact():
    # dropping the finest detail level reproduces the shorter ladder exactly,
    # because each level solves against the restricted load of the next
    f4 = quadrature.load_vector(4, bench.builtin_problems()["exp"].g)
    long = solver.multilevel_from_load(4, f4)
    f3 = assembly.refinement_matrix(3) @ f4
    short = solver.multilevel_from_load(3, f3)
    assert np.array_equal(long.coarse, short.coarse)
    for a, b in zip(long.details[:-1], short.details):
        assert np.array_equal(a, b)
    truncated = solver.MultilevelSolution(1, long.coarse, long.details[:-1])
    assert np.array_equal(truncated.prolong(), short.prolong())


@pytest.mark.parametrize("j", (1, 2, 3))
def test_subspace_splitting_identity(j):
    # B^T D_c^{-1} B + C^T E^{-1} C = D_f^{-1}, the exact-splitting identity
    assert solver.verify_identity(j) <= 1e-11


def test_verify_identity_rejects_large_level():
    with pytest.raises(ValueError):
        solver.verify_identity(9)


def test_galerkin_orthogonality():
    # the FEM error is H1-orthogonal to V_j: a(u_h, v) = (g, v) for all v,
    # equivalently the coarse restriction of the fine residual vanishes
    g = bench.builtin_problems()["sine"].g
    j = 3
    c = solver.fem_solve(j + 1, g)
    coarse_residual = assembly.refinement_matrix(j) @ (
        assembly.stiffness_matrix(j + 1) @ c - quadrature.load_vector(j + 1, g)
    )
    assert np.max(np.abs(coarse_residual)) <= 1e-9


def _pl_gradient(j: int, coeffs: np.ndarray):
    """Piecewise-constant gradient of a V_j member, for the h1_error oracle."""
    nodal = {}
    n = 2**j - 1
    for k in range(1, n + 1):
        for i in range(1, n + 1):
            nodal[(i, k)] = coeffs[mesh.linear_index(mesh.GridIndex(j, i, k))]

    def value(i, k):
        return nodal.get((int(i), int(k)), 0.0)

    def grad(x, y):
        s = np.clip(np.floor(np.asarray(x) * 2**j), 0, 2**j - 1).astype(int)
        t = np.clip(np.floor(np.asarray(y) * 2**j), 0, 2**j - 1).astype(int)
        fx = np.asarray(x) * 2**j - s
        fy = np.asarray(y) * 2**j - t
        lower = fx >= fy
        v00 = np.vectorize(value)(s, t)
        v10 = np.vectorize(value)(s + 1, t)
        v01 = np.vectorize(value)(s, t + 1)
        v11 = np.vectorize(value)(s + 1, t + 1)
        # lower triangle: u = v00 + (v10-v00) fx + (v11-v10) fy
        # upper triangle: u = v00 + (v11-v01) fx + (v01-v00) fy
        gx = np.where(lower, v10 - v00, v11 - v01) * 2**j
        gy = np.where(lower, v11 - v10, v01 - v00) * 2**j
        return gx, gy

    return grad


def test_h1_error_vanishes_for_space_member():
    j = 3
    rng = np.random.default_rng(2)
    coeffs = rng.standard_normal(mesh.n_interior(j))
    grad = _pl_gradient(j, coeffs)
    err = solver.h1_error(
        j, coeffs, lambda x, y: grad(x, y)[0], lambda x, y: grad(x, y)[1]
    )
    assert err <= 1e-10


def test_h1_error_of_zero_is_seminorm():
    # against zero coefficients the "error" is the H1 seminorm of u itself;
    # for u = sin(2pi x) sin(2pi y): integral of ux^2 + uy^2 is 2 pi^2
    p = bench.builtin_problems()["sine"]
    val = solver.h1_error(4, np.zeros(mesh.n_interior(4)), p.du_dx, p.du_dy)
    assert val == pytest.approx(np.sqrt(2.0) * np.pi, rel=1e-3)


def test_l2_error_of_zero_is_norm():
    # ||sin(2pi x) sin(2pi y)||_L2 = 1/2
    p = bench.builtin_problems()["sine"]
    val = solver.l2_error(4, np.zeros(mesh.n_interior(4)), p.u)
    assert val == pytest.approx(0.5, rel=1e-3)


def test_h1_error_decreases_with_level():
    p = bench.builtin_problems()["poly"]
    errs = [
        solver.h1_error(j, solver.fem_solve(j, p.g), p.du_dx, p.du_dy)
        for j in (2, 3, 4)
    ]
    assert errs[0] > errs[1] > errs[2]
    assert errs[1] / errs[2] == pytest.approx(2.0, abs=0.2)


def test_cg_solver_path_matches_direct():
    g = bench.builtin_problems()["sine"].g
    direct = solver.fem_solve(4, g)
    viacg = solver.fem_solve(4, g, solver="cg", tol=1e-13)
    assert np.max(np.abs(direct - viacg)) / np.max(np.abs(direct)) <= 1e-9
    with pytest.raises(ValueError):
        solver.fem_solve(2, g, solver="lu")


def test_export_solution_csv():
    j = 2
    coeffs = np.arange(9, dtype=float) / 7.0
    buf = io.StringIO()
    solver.export_solution_csv(buf, j, coeffs)
    lines = buf.getvalue().strip().splitlines()
    assert lines[0] == "level,i,k,x,y,value"
    assert len(lines) == 1 + mesh.n_interior(j)
    first = lines[1].split(",")
    assert first[:5] == ["2", "1", "1", "0.25", "0.25"]
    assert float(first[5]) == coeffs[0]
    # row-major: second row is (i,k) = (2,1)
    assert lines[2].split(",")[1:3] == ["2", "1"]
