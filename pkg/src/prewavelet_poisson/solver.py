"""Poisson solves in the hat basis and the multiresolution ladder.

``fem_solve`` is the single-level Galerkin solve.  ``multilevel_solve``
computes the same function as a coarse solve plus one detail solve per
level: with loads restricted downward from the finest level (the coarse
load is exactly the refinement matrix applied to the fine load), the
prolonged ladder coefficients reproduce the direct fine-level solution to
solver precision, which is the central equivalence this package exists to
demonstrate.  Error norms are measured with the degree-5 rule regardless of
the assembly rule.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import assembly, linalg, mesh, prewavelet, quadrature


@lru_cache(maxsize=None)
def _stiffness_factor(j: int) -> linalg.CholeskyFactor:
    return linalg.CholeskyFactor(assembly.stiffness_matrix(j))


@lru_cache(maxsize=None)
def _detail_factor(j: int) -> linalg.CholeskyFactor:
    return linalg.CholeskyFactor(prewavelet.wavelet_gram(j))


def _solve_spd(matrix_factory, factor_factory, rhs, solver, tol):
    if solver == "direct":
        return factor_factory().solve(rhs)
    if solver == "cg":
        x, report = linalg.cg_solve(matrix_factory(), rhs, tol=tol)
        if not report.converged:
            raise RuntimeError(
                f"cg stalled at relative residual {report.relative_residual:.3g} "
                f"after {report.iterations} iterations (tol {tol:.3g})"
            )
        return x
    raise ValueError(f"solver must be 'direct' or 'cg', got {solver!r}")


def fem_solve(
    j: int,
    g,
    rule: quadrature.TriangleRule = quadrature.MID3,
    solver: str = "direct",
    tol: float = 1e-12,
) -> np.ndarray:
    """Galerkin coefficients of the level-``j`` approximation to -lap(u) = g.

    Returns the nodal values at the interior vertices (the hat basis is
    nodal).  ``solver`` picks Cholesky (cached per level) or conjugate
    gradients with relative tolerance ``tol``.
    """
    rhs = quadrature.load_vector(j, g, rule)
    return _solve_spd(
        lambda: assembly.stiffness_matrix(j), lambda: _stiffness_factor(j), rhs, solver, tol
    )


def wavelet_solve(
    j: int,
    g,
    rule: quadrature.TriangleRule = quadrature.MID3,
    solver: str = "direct",
    tol: float = 1e-12,
) -> np.ndarray:
    """Detail coefficients at level ``j`` for the source ``g``.

    Solves the detail Gram system against the wavelet load built from the
    level ``j+1`` load vector.  Adding the prolonged result to the prolonged
    coarse solution advances the ladder by one level.
    """
    rhs = quadrature.wavelet_load(j, quadrature.load_vector(j + 1, g, rule))
    return _solve_spd(
        lambda: prewavelet.wavelet_gram(j), lambda: _detail_factor(j), rhs, solver, tol
    )


@dataclass(frozen=True)
class MultilevelSolution:
    """Coarse coefficients plus one detail vector per refinement step."""

    base_level: int
    coarse: np.ndarray
    details: tuple[np.ndarray, ...]

    @property
    def top_level(self) -> int:
        return self.base_level + len(self.details)

    def prolong(self, level: int | None = None) -> np.ndarray:
        """Nodal coefficients of the accumulated solution at ``level``.

        Defaults to the top level.  Truncating at a lower level uses only
        the detail vectors below it, leaving them untouched.
        """
        if level is None:
            level = self.top_level
        if not (self.base_level <= level <= self.top_level):
            raise ValueError(
                f"level must lie in {self.base_level}..{self.top_level}, got {level}"
            )
        c = self.coarse
        for j in range(self.base_level, level):
            b = self.details[j - self.base_level]
            c = assembly.refinement_matrix(j).T @ c + prewavelet.wavelet_matrix(j).T @ b
        return c


def multilevel_from_load(
    top_level: int,
    fine_load: np.ndarray,
    base_level: int = 1,
    solver: str = "direct",
    tol: float = 1e-12,
) -> MultilevelSolution:
    """Multiresolution ladder driven by a given finest-level load vector.

    Coarser loads are restrictions of ``fine_load`` through the refinement
    matrices, so the ladder is exactly consistent: prolonging the result
    reproduces the direct solve against ``fine_load`` to solver precision,
    and truncating a deeper ladder reproduces a shallower one exactly.
    """
    if not (1 <= base_level <= top_level):
        raise ValueError(f"need 1 <= base level <= top level, got {base_level}..{top_level}")
    fine_load = np.asarray(fine_load, dtype=float)
    expected = mesh.n_interior(top_level)
    if fine_load.shape != (expected,):
        raise ValueError(
            f"load for level {top_level} must have length {expected}, got {fine_load.shape}"
        )
    loads = {top_level: fine_load}
    for j in range(top_level - 1, base_level - 1, -1):
        loads[j] = assembly.refinement_matrix(j) @ loads[j + 1]
    coarse = _solve_spd(
        lambda: assembly.stiffness_matrix(base_level),
        lambda: _stiffness_factor(base_level),
        loads[base_level],
        solver,
        tol,
    )
    details = []
    for j in range(base_level, top_level):
        rhs = prewavelet.wavelet_matrix(j) @ loads[j + 1]
        details.append(
            _solve_spd(
                lambda: prewavelet.wavelet_gram(j), lambda: _detail_factor(j), rhs, solver, tol
            )
        )
    return MultilevelSolution(base_level, coarse, tuple(details))


def multilevel_solve(
    top_level: int,
    g,
    rule: quadrature.TriangleRule = quadrature.MID3,
    base_level: int = 1,
    solver: str = "direct",
    tol: float = 1e-12,
) -> MultilevelSolution:
    """Coarse solve plus detail corrections up to ``top_level`` for source g.

    The load vector is assembled once at the top level and restricted
    downward, sharing quadrature with the direct fine-level solve so the
    two agree to solver precision.
    """
    return multilevel_from_load(
        top_level, quadrature.load_vector(top_level, g, rule), base_level, solver, tol
    )


def verify_identity(j: int) -> float:
    """Max-abs residual of the two-level decomposition identity.

    Checks, densely, that restriction through the coarse solve plus
    restriction through the detail solve reassemble the inverse of the fine
    stiffness matrix:  P' Dc^-1 P + Q' E^-1 Q = Df^-1 with P, Q the
    refinement and wavelet matrices.  Dense inversions: keep j <= 4.
    """
    if not (1 <= j <= 4):
        raise ValueError(f"dense identity check supports levels 1..4, got {j}")
    p = assembly.refinement_matrix(j).toarray()
    q = prewavelet.wavelet_matrix(j).toarray()
    dc = assembly.stiffness_matrix(j).toarray()
    e = prewavelet.wavelet_gram(j).toarray()
    df = assembly.stiffness_matrix(j + 1).toarray()
    lhs = p.T @ np.linalg.solve(dc, p) + q.T @ np.linalg.solve(e, q)
    return float(np.max(np.abs(lhs - np.linalg.inv(df))))


def _nodal_on_triangles(j: int, coeffs: np.ndarray) -> np.ndarray:
    """Nodal values at each triangle vertex, zero on the boundary: (T, 3)."""
    verts = mesh.triangle_vertex_array(j)
    n = 2**j - 1
    ix = verts[..., 0]
    iy = verts[..., 1]
    interior = (ix >= 1) & (ix <= n) & (iy >= 1) & (iy <= n)
    lin = np.where(interior, (iy - 1) * n + (ix - 1), 0)
    return np.where(interior, coeffs[lin], 0.0)


def _gradients(j: int) -> tuple[np.ndarray, np.ndarray]:
    """Barycentric gradients per triangle: two arrays of shape (T, 3)."""
    verts = mesh.triangle_vertex_array(j) / 2**j
    x = verts[..., 0]
    y = verts[..., 1]
    two_area = (x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0]) - (x[:, 2] - x[:, 0]) * (
        y[:, 1] - y[:, 0]
    )
    gx = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    gy = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    return gx / two_area[:, None], gy / two_area[:, None]


def h1_error(
    j: int,
    coeffs: np.ndarray,
    du_dx,
    du_dy,
    rule: quadrature.TriangleRule = quadrature.GAUSS7,
) -> float:
    """H1 seminorm distance between exact gradients and the nodal solution.

    The discrete gradient is constant per triangle; the exact gradient is
    sampled with the given rule (degree 5 by default).
    """
    coeffs = np.asarray(coeffs, dtype=float)
    vals = _nodal_on_triangles(j, coeffs)
    gx, gy = _gradients(j)
    uhx = np.sum(vals * gx, axis=1)
    uhy = np.sum(vals * gy, axis=1)
    verts = mesh.triangle_vertex_array(j) / 2**j
    pts = rule.point_array()
    wts = rule.weight_array()
    xy = np.einsum("qb,tbd->tqd", pts, verts)
    ex = quadrature._evaluate(du_dx, xy[..., 0], xy[..., 1])
    ey = quadrature._evaluate(du_dy, xy[..., 0], xy[..., 1])
    area = 0.5 / 4**j
    sq = ((ex - uhx[:, None]) ** 2 + (ey - uhy[:, None]) ** 2) @ wts
    return float(np.sqrt(area * np.sum(sq)))


def l2_error(
    j: int,
    coeffs: np.ndarray,
    u,
    rule: quadrature.TriangleRule = quadrature.GAUSS7,
) -> float:
    """L2 distance between an exact solution and the nodal solution."""
    coeffs = np.asarray(coeffs, dtype=float)
    vals = _nodal_on_triangles(j, coeffs)
    verts = mesh.triangle_vertex_array(j) / 2**j
    pts = rule.point_array()
    wts = rule.weight_array()
    xy = np.einsum("qb,tbd->tqd", pts, verts)
    exact = quadrature._evaluate(u, xy[..., 0], xy[..., 1])
    approx = vals @ pts.T
    area = 0.5 / 4**j
    sq = (exact - approx) ** 2 @ wts
    return float(np.sqrt(area * np.sum(sq)))


def export_solution_csv(f, j: int, coeffs: np.ndarray) -> None:
    """Write nodal coefficients as CSV: level,i,k,x,y,value per interior vertex."""
    coeffs = np.asarray(coeffs, dtype=float)
    n = 2**j - 1
    if coeffs.shape != (n * n,):
        raise ValueError(f"expected {n * n} values for level {j}, got shape {coeffs.shape}")
    own = isinstance(f, (str, bytes)) or hasattr(f, "__fspath__")
    out = open(f, "w", newline="", encoding="utf-8") if own else f
    try:
        writer = csv.writer(out)
        writer.writerow(["level", "i", "k", "x", "y", "value"])
        for m in range(n * n):
            k, i = divmod(m, n)
            i += 1
            k += 1
            writer.writerow([j, i, k, repr(i / 2**j), repr(k / 2**j), repr(float(coeffs[m]))])
    finally:
        if own:
            out.close()
