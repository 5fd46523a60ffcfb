"""Multilevel prewavelet solver for the Dirichlet Poisson problem.

The package solves -laplace(u) = g on the unit square with piecewise-linear
finite elements on nested Type-1 triangulations, either directly at one
level or as a coarse solve plus a ladder of H1-orthogonal detail (prewavelet)
corrections whose sum reproduces the fine-level solution.
"""

from .assembly import cross_level_gram, refinement_matrix, refinement_row, stiffness_matrix
from .bench import BenchRecord, TestProblem, builtin_problems, run_benchmark
from .homogenize import DirichletProblem, bilinear_lift, homogenize, reconstruct
from .linalg import NotPositiveDefiniteError, SolverReport, cg_solve, cholesky_solve
from .mesh import GridIndex, Triangle, inverse_index, linear_index, n_interior, support_triangles, triangles
from .prewavelet import (
    WaveletSpec,
    dimension_check,
    interior_wavelet,
    strip_wavelets,
    verify_orthogonality,
    wavelet_gram,
    wavelet_matrix,
)
from .quadrature import GAUSS7, MID3, TabulatedFunction, TriangleRule, integrate, load_vector, wavelet_load
from .solver import (
    MultilevelSolution,
    export_solution_csv,
    fem_solve,
    h1_error,
    l2_error,
    multilevel_solve,
    verify_identity,
    wavelet_solve,
)

__version__ = "0.1.0"

__all__ = [
    "BenchRecord",
    "DirichletProblem",
    "GAUSS7",
    "GridIndex",
    "MID3",
    "MultilevelSolution",
    "NotPositiveDefiniteError",
    "SolverReport",
    "TabulatedFunction",
    "TestProblem",
    "Triangle",
    "TriangleRule",
    "WaveletSpec",
    "bilinear_lift",
    "builtin_problems",
    "cg_solve",
    "cholesky_solve",
    "cross_level_gram",
    "dimension_check",
    "export_solution_csv",
    "fem_solve",
    "h1_error",
    "homogenize",
    "integrate",
    "interior_wavelet",
    "inverse_index",
    "l2_error",
    "linear_index",
    "load_vector",
    "multilevel_solve",
    "n_interior",
    "reconstruct",
    "refinement_matrix",
    "refinement_row",
    "run_benchmark",
    "stiffness_matrix",
    "strip_wavelets",
    "support_triangles",
    "triangles",
    "verify_identity",
    "verify_orthogonality",
    "wavelet_gram",
    "wavelet_load",
    "wavelet_matrix",
    "wavelet_solve",
]
