"""Refinement and Galerkin matrices for the nested hat-function spaces.

All matrices here follow the row-major interior-vertex ordering of
:mod:`.mesh` and use the H1 seminorm inner product (integral of grad.grad).
Every entry is a multiple of 1/2, so the floating-point values are exact and
the identities between these matrices hold exactly, not just to rounding.

Stencils (offsets are relative to the coarse vertex, fine offsets relative
to its fine-grid image ``(2i, 2k)``):

* refinement: a coarse hat is the fine hat at (2i, 2k) plus half the six
  fine hats at offsets (+-1, 0), (0, +-1), (-1, -1), (+1, +1).
* stiffness: 4 on the diagonal, -1 toward the four axis neighbors; the
  diagonal-direction neighbors (+-1, +-1 along the cell diagonal) integrate
  to exactly zero and are not stored.
* cross-level Gram (coarse row against fine column): the 17-entry table in
  ``_GRAM_STENCIL`` below, equal to refinement times fine stiffness.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .mesh import GridIndex, n_interior

_REFINE_STENCIL = {
    (0, 0): 1.0,
    (-1, 0): 0.5,
    (1, 0): 0.5,
    (0, -1): 0.5,
    (0, 1): 0.5,
    (-1, -1): 0.5,
    (1, 1): 0.5,
}

_STIFFNESS_STENCIL = {
    (0, 0): 4.0,
    (-1, 0): -1.0,
    (1, 0): -1.0,
    (0, -1): -1.0,
    (0, 1): -1.0,
}

_GRAM_STENCIL = {
    (0, 0): 2.0,
    (-1, 0): 0.5,
    (1, 0): 0.5,
    (0, -1): 0.5,
    (0, 1): 0.5,
    (-1, -1): 1.0,
    (1, 1): 1.0,
    (-2, 0): -0.5,
    (2, 0): -0.5,
    (0, -2): -0.5,
    (0, 2): -0.5,
    (-2, -1): -0.5,
    (-1, -2): -0.5,
    (2, 1): -0.5,
    (1, 2): -0.5,
    (-1, 1): -1.0,
    (1, -1): -1.0,
}


def refinement_row(g: GridIndex) -> dict[tuple[int, int], float]:
    """Coefficients of a coarse hat in the level ``j+1`` hat basis.

    Keys are fine (i, k) pairs; all seven always lie in the fine interior,
    and the coefficients sum to 4.
    """
    fi, fk = 2 * g.i, 2 * g.k
    return {(fi + di, fk + dk): v for (di, dk), v in _REFINE_STENCIL.items()}


def _stencil_matrix(j_row: int, j_col: int, stencil: dict[tuple[int, int], float]) -> sp.csr_matrix:
    """Matrix with one stencil row per level ``j_row`` interior vertex.

    Column indices live on level ``j_col``; offsets are applied to the
    row vertex mapped onto the column grid, and entries falling outside
    the column interior are dropped.
    """
    n_r = 2**j_row - 1
    n_c = 2**j_col - 1
    mult = 2 ** (j_col - j_row)
    ordinal = np.arange(n_r * n_r)
    kc = ordinal // n_r + 1
    ic = ordinal % n_r + 1
    rows, cols, vals = [], [], []
    for (di, dk), v in stencil.items():
        fi = mult * ic + di
        fk = mult * kc + dk
        keep = (fi >= 1) & (fi <= n_c) & (fk >= 1) & (fk <= n_c)
        rows.append(ordinal[keep])
        cols.append((fk[keep] - 1) * n_c + (fi[keep] - 1))
        vals.append(np.full(int(keep.sum()), v))
    mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_r * n_r, n_c * n_c),
    ).tocsr()
    mat.sort_indices()
    return mat


@lru_cache(maxsize=None)
def refinement_matrix(j: int) -> sp.csr_matrix:
    """Rows are level-``j`` hats expanded in the level ``j+1`` basis."""
    if j < 1:
        raise ValueError(f"level must be >= 1, got {j}")
    return _stencil_matrix(j, j + 1, _REFINE_STENCIL)


@lru_cache(maxsize=None)
def stiffness_matrix(j: int) -> sp.csr_matrix:
    """H1-seminorm Gram matrix of the level-``j`` hats (size ``(2^j-1)^2``).

    The stencil is level independent; along the cell diagonals the gradient
    inner products cancel exactly, leaving the five-point pattern.
    """
    if j < 1:
        raise ValueError(f"level must be >= 1, got {j}")
    return _stencil_matrix(j, j, _STIFFNESS_STENCIL)


@lru_cache(maxsize=None)
def cross_level_gram(j: int) -> sp.csr_matrix:
    """Inner products of level-``j`` hats against level ``j+1`` hats.

    Row m, column p holds the H1 seminorm product of coarse hat m with fine
    hat p.  Equals ``refinement_matrix(j) @ stiffness_matrix(j+1)`` exactly;
    rows of this matrix are the orthogonality constraints the detail space
    must satisfy.
    """
    if j < 1:
        raise ValueError(f"level must be >= 1, got {j}")
    return _stencil_matrix(j, j + 1, _GRAM_STENCIL)


def interior_count(j: int) -> int:
    """Alias of :func:`.mesh.n_interior` for callers working with matrices."""
    return n_interior(j)
