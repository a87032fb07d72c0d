import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from densitycut import densities as D, grid2d
from densitycut.errors import EmptySide, GridTooCoarse, GridTooFine

ADM = (1, 2, 3)


def unit_square():
    return D.builtin("uniform", {"dim": 2})


def test_three_by_three_masses():
    g = grid2d.build_grid(unit_square(), ADM, 0.5, min_cells=2)
    assert g.shape == (3, 3)
    np.testing.assert_allclose(g.mu.reshape(3, 3),
                               [[0.0625, 0.125, 0.0625], [0.125, 0.25, 0.125],
                                [0.0625, 0.125, 0.0625]])
    assert math.fsum(g.mu) == pytest.approx(1.0)
    assert g.num_edges == 12


def test_left_column_cut():
    g = grid2d.build_grid(unit_square(), ADM, 0.5, min_cells=2)
    left = g.vertex_id(0, np.arange(3))
    cut = grid2d.cut_sparsity(g, left)
    # boundary faces have clipped length 0.25 + 0.5 + 0.25 = 1 and the column mass is 1/4
    assert cut.phi == pytest.approx(4.0)
    assert cut.boundary_edges.size == 3


def test_grid_limits():
    with pytest.raises(GridTooCoarse):
        grid2d.build_grid(unit_square(), ADM, 0.5)
    with pytest.raises(GridTooFine):
        grid2d.build_grid(unit_square(), ADM, 1e-3, max_vertices=10_000)


def test_kappa_tau_follow_exponents():
    rho = D.builtin("valley")
    g = grid2d.build_grid(rho, (1, 2, 3), 0.1)
    np.testing.assert_allclose(g.kappa, g.edge_len / g.h * g.edge_rho ** 3)
    np.testing.assert_allclose(g.tau, g.edge_len * g.edge_rho ** 2)
    np.testing.assert_allclose(g.mu, g.cell_areas * g.vertex_rho)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.03, 0.25))
def test_total_mass_is_riemann_sum(h):
    rho = D.builtin("valley", {"breadth": 1.0, "length": 1.5})
    g = grid2d.build_grid(rho, ADM, h)
    assert math.fsum(g.cell_areas) == pytest.approx(1.5, rel=1e-12)
    assert math.fsum(g.mu) == pytest.approx(D.mass(rho, 1.0), rel=0.05)


def test_laplacian_is_symmetric_with_zero_rows():
    g = grid2d.build_grid(D.builtin("half_moons"), ADM, 0.1)
    L, M = grid2d.laplacian_mass(g)
    assert abs(L - L.T).max() == 0
    np.testing.assert_allclose(np.asarray(L.sum(axis=1)).ravel(), 0, atol=1e-12)
    assert M.shape == L.shape


def test_cut_sparsity_complement_symmetry_and_empty():
    g = grid2d.build_grid(D.builtin("valley"), ADM, 0.1)
    rng = np.random.default_rng(0)
    A = rng.random(g.num_vertices) < 0.3
    assert grid2d.cut_sparsity(g, A).phi == grid2d.cut_sparsity(g, ~A).phi
    with pytest.raises(EmptySide):
        grid2d.cut_sparsity(g, np.zeros(g.num_vertices, dtype=bool))


def test_connected_components_order():
    g = grid2d.build_grid(unit_square(), ADM, 0.25)
    mask = np.zeros(g.shape, dtype=bool)
    mask[0, :] = True
    mask[3:, 3:] = True
    comps = grid2d.connected_components(g, mask.ravel())
    assert len(comps) == 2
    assert comps[0].weight >= comps[1].weight
    assert sorted(c.vertices.size for c in comps) == [4, 5]


def test_dump_load_roundtrip(tmp_path):
    g = grid2d.build_grid(D.builtin("valley"), ADM, 0.25)
    path = tmp_path / "g.txt"
    grid2d.dump_grid(g, path)
    first = path.read_text().splitlines()[0]
    assert first.split()[:2] == [str(g.n), str(g.m)]
    h = grid2d.load_grid(path)
    np.testing.assert_array_equal(h.mu, g.mu)
    np.testing.assert_array_equal(h.kappa, g.kappa)
    np.testing.assert_array_equal(h.tau, g.tau)
    assert h.origin == g.origin
