import numpy as np
import pytest
import scipy.linalg
import scipy.sparse as sp

from densitycut.eigensolve import (bottom_eigenspace, dense_second_eigenvalue,
                                   residual_norm, second_eigenpair)
from densitycut.errors import SingularPencil


def path(n, w=1.0):
    main = np.full(n, 2.0 * w)
    main[[0, -1]] = w
    return sp.diags([main, -w * np.ones(n - 1), -w * np.ones(n - 1)], [0, 1, -1], format="csr")


def test_path_closed_form():
    n = 50
    pair = second_eigenpair(path(n), np.ones(n))
    assert pair.lam == pytest.approx(2 - 2 * np.cos(np.pi / n), rel=1e-10)


def test_normalization_and_sign():
    n = 40
    m = np.linspace(1, 2, n)
    pair = second_eigenpair(path(n), m)
    v = pair.vector
    assert np.dot(m, v) == pytest.approx(0.0, abs=1e-10)
    assert np.dot(m * v, v) == pytest.approx(1.0, rel=1e-12)
    assert residual_norm(path(n), m, pair.lam, v) == pytest.approx(pair.residual)
    # mass-weighted median is not positive
    order = np.argsort(v)
    med = v[order[np.searchsorted(np.cumsum(m[order]), 0.5 * m.sum())]]
    assert med <= 0


def test_lobpcg_agrees_with_shift_invert():
    n = 300
    rng = np.random.default_rng(0)
    m = rng.uniform(0.5, 2.0, n)
    K = path(n) + 0.0
    a = second_eigenpair(K, m).lam
    b = second_eigenpair(K, m, method="lobpcg", tol=1e-9).lam
    assert b == pytest.approx(a, rel=1e-7)


def test_dense_reference_agrees_with_scipy():
    n = 30
    m = np.arange(1, n + 1, dtype=float)
    ref = scipy.linalg.eigh(path(n).toarray(), np.diag(m), eigvals_only=True)[1]
    assert dense_second_eigenvalue(path(n), m) == pytest.approx(ref, rel=1e-12)


def test_disconnected_gives_zero():
    K = sp.block_diag([path(4), path(5)]).tocsr()
    pair = second_eigenpair(K, np.ones(9))
    assert pair.lam == 0.0
    assert pair.method == "components"


def test_massless_component_is_singular():
    K = sp.block_diag([path(4), path(3)]).tocsr()
    m = np.r_[np.ones(4), np.zeros(3)]
    with pytest.raises(SingularPencil):
        second_eigenpair(K, m)


def test_inert_vertices_get_zero():
    K = sp.block_diag([path(6), sp.csr_matrix((2, 2))]).tocsr()
    m = np.r_[np.ones(6), 0.0, 0.0]
    pair = second_eigenpair(K, m)
    assert pair.lam == pytest.approx(2 - 2 * np.cos(np.pi / 6), rel=1e-10)
    assert np.all(pair.vector[6:] == 0.0)


def test_two_vertex_pencil():
    K = np.array([[1.0, -1.0], [-1.0, 1.0]])
    assert second_eigenpair(K, np.ones(2)).lam == pytest.approx(2.0)


def test_bottom_eigenspace_square_grid_is_double():
    n = 12
    P = path(n)
    I = sp.identity(n)
    K = (sp.kron(P, I) + sp.kron(I, P)).tocsr()
    pairs = bottom_eigenspace(K, np.ones(n * n))
    assert len(pairs) == 2
    a, b = pairs[0].vector, pairs[1].vector
    assert abs(np.dot(a, b)) < 1e-8
    for p in pairs:
        assert p.lam == pytest.approx(2 - 2 * np.cos(np.pi / n), rel=1e-8)


def test_bottom_eigenspace_simple_on_rectangle():
    P1, P2 = path(10), path(7)
    K = (sp.kron(P1, sp.identity(7)) + sp.kron(sp.identity(10), P2)).tocsr()
    assert len(bottom_eigenspace(K, np.ones(70))) == 1


def test_seed_determinism():
    n = 200
    K = path(n)
    a = second_eigenpair(K, np.ones(n), seed=3).vector
    b = second_eigenpair(K, np.ones(n), seed=3).vector
    assert a.tobytes() == b.tobytes()


def test_nearly_disconnected_pencil():
    # coupling far below roundoff of the shifted factorization
    K = sp.block_diag([path(8, 5.0), path(8, 5.0)]).tolil()
    w = 1e-30
    K[7, 8] = K[8, 7] = -w
    K[7, 7] += w
    K[8, 8] += w
    pair = second_eigenpair(K.tocsr(), np.ones(16))
    assert pair.lam < 1e-12
    assert np.all(np.sign(pair.vector[:8]) == np.sign(pair.vector[0]))
    assert np.all(np.sign(pair.vector[8:]) == -np.sign(pair.vector[0]))
