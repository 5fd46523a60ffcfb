"""Direct and iterative solvers for the symmetric positive definite systems.

Both Galerkin systems solved in this package are SPD: the hat-basis
stiffness matrix (narrow band in row-major ordering) and the detail Gram
matrix (sparse apart from one globally supported row).  ``cholesky_solve``
picks banded or dense Cholesky accordingly; ``cg_solve`` is a stock
conjugate gradient with a relative-residual stopping rule, starting from
zero, with an optional diagonal preconditioner.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp


class NotPositiveDefiniteError(Exception):
    """Cholesky pivot failure: the matrix is not positive definite."""


@dataclass
class SolverReport:
    """Outcome of one linear solve.

    iterations is 0 for direct solves.  relative_residual is the true
    ``||b - A x|| / ||b||`` of the returned solution.  converged records
    whether the stopping criterion was met (always True for a direct solve
    that returned).
    """

    iterations: int
    relative_residual: float
    seconds: float
    converged: bool = True


def _as_csr(a) -> sp.csr_matrix:
    if sp.issparse(a):
        return a.tocsr()
    return sp.csr_matrix(np.asarray(a, dtype=float))


def _check_system(a: sp.csr_matrix, b: np.ndarray) -> None:
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    if b.shape != (a.shape[0],):
        raise ValueError(
            f"right-hand side length {b.shape} does not match matrix of size {a.shape[0]}"
        )
    scale = np.max(np.abs(a.data)) if a.nnz else 0.0
    skew = a - a.T
    asym = np.max(np.abs(skew.data)) if skew.nnz else 0.0
    if asym > 1e-10 * max(scale, 1.0):
        raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3g})")


class CholeskyFactor:
    """Reusable Cholesky factorization with banded/dense dispatch."""

    def __init__(self, a) -> None:
        a = _as_csr(a)
        if a.shape[0] != a.shape[1]:
            raise ValueError(f"matrix must be square, got shape {a.shape}")
        self.n = a.shape[0]
        coo = a.tocoo()
        bw = int(np.max(np.abs(coo.row - coo.col))) if coo.nnz else 0
        try:
            if bw + 1 <= max(8, self.n // 4):
                band = np.zeros((bw + 1, self.n))
                upper = coo.col >= coo.row
                band[bw + coo.row[upper] - coo.col[upper], coo.col[upper]] = coo.data[upper]
                self._banded = scipy.linalg.cholesky_banded(band, check_finite=False)
                self._dense = None
            else:
                self._banded = None
                self._dense = scipy.linalg.cho_factor(a.toarray(), check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefiniteError(str(exc)) from exc

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        if b.shape != (self.n,):
            raise ValueError(f"right-hand side length {b.shape} does not match size {self.n}")
        if self._banded is not None:
            return scipy.linalg.cho_solve_banded((self._banded, False), b, check_finite=False)
        return scipy.linalg.cho_solve(self._dense, b, check_finite=False)


def cholesky_solve(a, b) -> tuple[np.ndarray, SolverReport]:
    """Solve a SPD system by Cholesky factorization.

    Banded systems go through the banded factorization in natural ordering;
    anything without a usable band (the detail Gram has one dense row) is
    factored densely.  Raises NotPositiveDefiniteError on a pivot failure
    and ValueError on shape or symmetry violations.
    """
    a = _as_csr(a)
    b = np.asarray(b, dtype=float)
    _check_system(a, b)
    start = time.perf_counter()
    x = CholeskyFactor(a).solve(b)
    seconds = time.perf_counter() - start
    bnorm = float(np.linalg.norm(b))
    res = float(np.linalg.norm(b - a @ x)) / bnorm if bnorm else 0.0
    return x, SolverReport(iterations=0, relative_residual=res, seconds=seconds)


def cg_solve(
    a,
    b,
    tol: float = 1e-10,
    max_iter: int | None = None,
    diagonal_precondition: bool = False,
) -> tuple[np.ndarray, SolverReport]:
    """Conjugate gradients from a zero start.

    Stops once the recurrence residual satisfies ``||r|| <= tol * ||b||``
    or after ``max_iter`` iterations (default ``10 n``).  Non-convergence
    is signalled through ``report.converged``; the partial iterate is still
    returned.  The report carries the true final residual.
    """
    a = _as_csr(a)
    b = np.asarray(b, dtype=float)
    _check_system(a, b)
    if not (0.0 < tol < 1.0):
        raise ValueError(f"tolerance must lie in (0, 1), got {tol}")
    n = a.shape[0]
    if max_iter is None:
        max_iter = 10 * n
    start = time.perf_counter()
    x = np.zeros(n)
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return x, SolverReport(0, 0.0, time.perf_counter() - start, True)
    inv_diag = None
    if diagonal_precondition:
        d = a.diagonal()
        if np.any(d <= 0):
            raise NotPositiveDefiniteError("diagonal has non-positive entries")
        inv_diag = 1.0 / d
    r = b.copy()
    z = inv_diag * r if inv_diag is not None else r
    p = z.copy()
    rz = float(r @ z)
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        ap = a @ p
        alpha = rz / float(p @ ap)
        x += alpha * p
        r -= alpha * ap
        if float(np.linalg.norm(r)) <= tol * bnorm:
            converged = True
            break
        z = inv_diag * r if inv_diag is not None else r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    seconds = time.perf_counter() - start
    res = float(np.linalg.norm(b - a @ x)) / bnorm
    return x, SolverReport(iterations, res, seconds, converged)
