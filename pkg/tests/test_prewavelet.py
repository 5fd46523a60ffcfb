"""Prewavelet basis tests.

Frozen stencils pin the five closed-form families; the orthogonality and
rank checks then certify them against the assembled Gram matrix, which has
its own independent oracle in test_assembly.
"""

import io

import numpy as np
import pytest

from prewavelet_poisson import assembly, mesh, prewavelet


def test_family_stencils_frozen():
    # v-edge and h-edge pairs (weights 2, 1 along the left and bottom edges)
    assert prewavelet.interior_wavelet(1, 2, 0, 1).stencil == {
        (1, 2): 2.0,
        (1, 3): 1.0,
    }
    assert prewavelet.interior_wavelet(1, 2, 0, 2).stencil == {
        (1, 4): 2.0,
        (1, 5): 1.0,
    }
    assert prewavelet.interior_wavelet(2, 2, 1, 0).stencil == {
        (2, 1): 2.0,
        (3, 1): 1.0,
    }
    assert prewavelet.interior_wavelet(2, 2, 2, 0).stencil == {
        (4, 1): 2.0,
        (5, 1): 1.0,
    }
    # the three interior quartets at (i,k) = (1,1)
    assert prewavelet.interior_wavelet(3, 2, 1, 1).stencil == {
        (2, 2): -1.0,
        (3, 2): 1.0,
        (2, 3): 1.0,
        (3, 3): 1.0,
    }
    assert prewavelet.interior_wavelet(4, 2, 1, 1).stencil == {
        (1, 1): 1.0,
        (2, 1): 1.0,
        (1, 2): 1.0,
        (2, 2): -1.0,
    }
    assert prewavelet.interior_wavelet(5, 2, 1, 1).stencil == {
        (1, 2): 1.0,
        (2, 3): 1.0,
        (2, 1): -1.0,
        (3, 2): -1.0,
    }
    # shifted interior instances at (2,1), (1,2), (2,2)
    assert prewavelet.interior_wavelet(3, 2, 2, 1).stencil == {
        (4, 2): -1.0,
        (5, 2): 1.0,
        (4, 3): 1.0,
        (5, 3): 1.0,
    }
    assert prewavelet.interior_wavelet(4, 2, 1, 2).stencil == {
        (1, 3): 1.0,
        (2, 3): 1.0,
        (1, 4): 1.0,
        (2, 4): -1.0,
    }
    assert prewavelet.interior_wavelet(5, 2, 2, 2).stencil == {
        (3, 4): 1.0,
        (4, 5): 1.0,
        (4, 3): -1.0,
        (5, 4): -1.0,
    }


def test_interior_wavelet_range_errors():
    with pytest.raises(ValueError):
        prewavelet.interior_wavelet(1, 2, 1, 1)  # family 1 needs i == 0
    with pytest.raises(ValueError):
        prewavelet.interior_wavelet(2, 2, 1, 1)  # family 2 needs k == 0
    with pytest.raises(ValueError):
        prewavelet.interior_wavelet(3, 2, 3, 1)  # i beyond 2^j - 2
    with pytest.raises(ValueError):
        prewavelet.interior_wavelet(1, 1, 0, 1)  # empty range at j = 1
    with pytest.raises(ValueError):
        prewavelet.interior_wavelet(6, 2, 1, 1)  # no such family


def test_closed_form_counts_and_small_support():
    for j in (1, 2, 3, 4):
        n = 2**j - 1
        ws = prewavelet.closed_form_wavelets(j)
        assert len(ws) == 3 * n * n - 4 * n + 1
        assert all(len(w.stencil) <= 4 for w in ws)


def test_every_closed_form_is_exactly_orthogonal():
    # M v = 0 with no rounding: the defining property, checked entrywise
    for j in (1, 2, 3):
        m = assembly.cross_level_gram(j).toarray()
        for w in prewavelet.closed_form_wavelets(j):
            v = np.zeros(mesh.n_interior(j + 1))
            for (fi, fk), c in w.stencil.items():
                v[mesh.linear_index(mesh.GridIndex(j + 1, fi, fk))] = c
            assert np.max(np.abs(m @ v)) == 0.0


@pytest.mark.parametrize("j", (1, 2, 3, 4, 5))
def test_strip_counts(j):
    strips = prewavelet.strip_wavelets(j)
    assert len(strips) == 2 ** (j + 3) - 8


@pytest.mark.parametrize("j", (1, 2, 3, 4, 5))
def test_exactly_one_global_function(j):
    strips = prewavelet.strip_wavelets(j)
    tagged = [w for w in strips if w.family == "global"]
    assert len(tagged) == 1
    w = tagged[0]
    # its support runs the whole top band: full width, both band rows
    n_fine = 2 ** (j + 1) - 1
    band = [(i, k) for (i, k) in w.stencil if k >= n_fine - 1]
    assert min(p[0] for p in band) == 1
    assert max(p[0] for p in band) == n_fine
    assert {p[1] for p in band} >= {n_fine - 1, n_fine}


@pytest.mark.parametrize("j", (1, 2, 3, 4, 5))
def test_basis_size_and_exact_orthogonality(j):
    basis = prewavelet.wavelet_basis(j)
    assert len(basis) == mesh.n_interior(j + 1) - mesh.n_interior(j)
    assert prewavelet.verify_orthogonality(j) == 0.0


@pytest.mark.parametrize("j", (1, 2, 3, 4))
def test_basis_rank_complete(j):
    c = prewavelet.wavelet_matrix(j).toarray()
    assert c.shape == (
        mesh.n_interior(j + 1) - mesh.n_interior(j),
        mesh.n_interior(j + 1),
    )
    assert np.linalg.matrix_rank(c) == c.shape[0]


def test_dimension_table_frozen():
    expected = {2: 5, 3: 16, 4: 33, 5: 56, 6: 85, 7: 120}
    for n, want in expected.items():
        formula, rank = prewavelet.dimension_check(3, n)
        assert formula == 3 * n * n - 4 * n + 1 == want
        assert rank == want
    formula, rank = prewavelet.dimension_check(3, 1)
    assert formula == rank == 0


def test_stacked_change_of_basis_invertible():
    # [B; C] maps fine coefficients onto coarse-plus-detail exactly once
    for j in (1, 2, 3):
        b = assembly.refinement_matrix(j).toarray()
        c = prewavelet.wavelet_matrix(j).toarray()
        s = np.vstack([b, c])
        assert s.shape[0] == s.shape[1]
        assert np.linalg.matrix_rank(s) == s.shape[0]


def test_wavelet_gram_family1_diagonal():
    # a(psi, psi) for a v-edge pair: 4*4 + 1*4 + 2*2*(-1) = 16
    for j in (2, 3):
        e = prewavelet.wavelet_gram(j).toarray()
        basis = prewavelet.wavelet_basis(j)
        for idx, w in enumerate(basis):
            if w.family == "v-edge":
                assert e[idx, idx] == 16.0


def test_wavelet_gram_against_dense_product():
    for j in (1, 2, 3):
        c = prewavelet.wavelet_matrix(j).toarray()
        d = assembly.stiffness_matrix(j + 1).toarray()
        expect = c @ d @ c.T
        got = prewavelet.wavelet_gram(j).toarray()
        assert np.array_equal(got, expect)


@pytest.mark.parametrize("j", (1, 2, 3, 4))
def test_wavelet_gram_positive_definite(j):
    e = prewavelet.wavelet_gram(j).toarray()
    assert np.array_equal(e, e.T)
    np.linalg.cholesky(e)  # raises LinAlgError if not SPD


def test_deterministic_construction():
    a = prewavelet.strip_wavelets(2)
    b = prewavelet.strip_wavelets(2)
    assert [w.stencil for w in a] == [w.stencil for w in b]
    assert [w.position for w in a] == [w.position for w in b]


def test_closed_form_ordering():
    families = [w.family for w in prewavelet.closed_form_wavelets(2)]
    assert families == (
        ["v-edge"] * 2 + ["h-edge"] * 2 + ["interior-1"] * 4
        + ["interior-2"] * 4 + ["interior-3"] * 4
    )


def test_dump_round_trip():
    j = 2
    buf = io.StringIO()
    prewavelet.dump_wavelet_matrix(j, buf)
    text = buf.getvalue()
    c = prewavelet.wavelet_matrix(j)
    header = text.splitlines()[0].split()
    assert [int(v) for v in header] == [c.shape[0], c.shape[1], c.nnz]
    rebuilt = prewavelet.read_wavelet_dump(io.StringIO(text))
    assert np.array_equal(rebuilt.toarray(), c.toarray())
