import math
import warnings

import numpy as np
import pytest
from scipy import integrate

from densitycut import densities as D, oned
from densitycut.errors import BadParams

ADM = (1, 2, 3)


def uniform():
    return D.builtin("uniform")


def test_sparsity_at_uniform():
    r = oned.sparsity_at(uniform(), ADM, 0.25)
    assert r.phi == pytest.approx(4.0)
    assert (r.left_mass, r.right_mass) == pytest.approx((0.25, 0.75))


def test_sparsity_at_abs_eps_against_quad():
    eps = 0.02
    rho = D.builtin("abs_eps", {"eps": eps})
    x = 0.3
    left, _ = integrate.quad(lambda t: abs(t) + eps, -1, x, points=[0])
    right, _ = integrate.quad(lambda t: abs(t) + eps, x, 1)
    r = oned.sparsity_at(rho, (1, 2, 3), x)
    assert r.phi == pytest.approx((x + eps) ** 2 / min(left, right), rel=1e-9)


def test_sweep_uniform_bisects():
    r = oned.sweep_sparsity_1d(uniform(), ADM)
    assert r.xhat == pytest.approx(0.5, abs=1e-6)
    assert r.phi == pytest.approx(2.0, rel=1e-8)


def test_sweep_abs_eps_cuts_at_dip():
    eps = 1e-3
    r = oned.sweep_sparsity_1d(D.builtin("abs_eps", {"eps": eps}), ADM)
    assert r.xhat == pytest.approx(0.0, abs=1e-9)
    assert r.phi == pytest.approx(eps ** 2 / (0.5 + eps), rel=1e-8)


@pytest.mark.parametrize("mesh_n", [16, 64, 256])
def test_fem_uniform_matches_discrete_closed_form(mesh_n):
    # P1 stiffness with lumped mass is the Neumann second difference on nodes
    lam = oned.lambda2_1d_fem(uniform(), ADM, mesh_n=mesh_n).lambda2
    h = 1.0 / mesh_n
    assert lam == pytest.approx(4 / h ** 2 * math.sin(math.pi * h / 2) ** 2, rel=1e-9)


def test_fem_converges_to_pi_squared():
    assert oned.lambda2_1d_fem(uniform(), ADM, mesh_n=2048).lambda2 == pytest.approx(
        math.pi ** 2, rel=1e-5)


def test_fem_rejects_coarse_mesh():
    with pytest.raises(BadParams):
        oned.fem_matrices(uniform(), ADM, 4)


def test_rayleigh_cosine():
    R = oned.rayleigh_1d(uniform(), ADM, lambda t: np.cos(np.pi * t),
                         lambda t: -np.pi * np.sin(np.pi * t))
    assert R == pytest.approx(math.pi ** 2, rel=1e-9)


@pytest.mark.parametrize("name,params", [("uniform", {}), ("abs_eps", {"eps": 0.01}),
                                         ("plateau", {"n": 10}),
                                         ("smooth_abs_eps", {"eps": 0.05})])
def test_witness_is_an_upper_bound_on_lambda2(name, params):
    rho = D.builtin(name, params)
    r = oned.analyze_1d(rho, ADM)
    assert r.lambda2 <= r.witness * (1 + 1e-6)
    assert r.witness <= r.buser_bound
    assert r.phi ** 2 / 4 <= r.lambda2


def test_buser_theta_picks_smaller_term():
    th = oned.buser_theta_1d(2.0, 0.0, ADM, 1.0)
    assert th == pytest.approx(1 / 8)
    th = oned.buser_theta_1d(1e-9, 1.0, ADM, 1.0)
    assert th == pytest.approx(math.log(1.5))


@pytest.mark.parametrize("name,params", [("uniform", {}), ("abs_eps", {"eps": 0.1}),
                                         ("plateau", {"n": 5})])
def test_muckenhoupt_brackets_lambda2(name, params):
    rho = D.builtin(name, params)
    lam = oned.lambda2_1d_fem(rho, ADM).lambda2
    lo, hi = oned.muckenhoupt_bound(rho, ADM)
    assert lo <= lam <= hi


def test_muckenhoupt_uniform_values():
    br = oned.muckenhoupt_bound(uniform(), ADM)
    assert br.constant == pytest.approx(1 / 16, rel=1e-6)
    assert (br.lower, br.upper) == pytest.approx((4.0, 64.0), rel=1e-6)


def test_muckenhoupt_flags_divergence():
    # a zero inside the domain makes rho^-gamma non-integrable at the median
    rho = D.tabulated(np.array([1.0, 0.0, 1.0]), 1.0)
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        br = oned.muckenhoupt_bound(rho, ADM)
    assert br.divergent and br.lower == 0.0
    assert any(issubclass(x.category, RuntimeWarning) for x in w)


def test_scaling_check_admissible_factors():
    chk = oned.scaling_check_1d(uniform(), ADM, 2.0, 4.0, 0.3, np.sin, np.cos)
    assert chk.phi_factor == pytest.approx(1 / 4)
    assert chk.rayleigh_factor == pytest.approx(1 / 16)
    assert chk.phi_error < 1e-10 and chk.rayleigh_error < 1e-10


def test_require_1d():
    with pytest.raises(BadParams):
        oned.sparsity_at(D.builtin("valley"), ADM, 0.5)
