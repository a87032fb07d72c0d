import math

import mpmath
import numpy as np
import pytest
from scipy import integrate

from densitycut import densities as D, mollify, oned, sweepcut
from densitycut.errors import BadParams, RadiusExceedsDomain

ADM = (1, 2, 3)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_mollifier_has_unit_mass(d):
    m = mollify.Mollifier(d)
    radial, _ = integrate.quad(lambda r: m(r) * r ** (d - 1), 0, 1, epsrel=1e-12)
    assert radial * mollify.sphere_area(d) == pytest.approx(1.0, rel=1e-10)


def test_grad_norm_1d_is_total_variation():
    m = mollify.Mollifier(1)
    dphi = lambda x: m.c * math.exp(-1 / (1 - x * x)) * 2 * x / (1 - x * x) ** 2
    tv, _ = integrate.quad(lambda x: abs(dphi(x)), -1, 1, points=[0], epsrel=1e-12)
    assert mollify.grad_l1_norm(1) == pytest.approx(tv, rel=1e-10)
    assert mollify.grad_l1_norm(1) == pytest.approx(1.6571, abs=1e-4)


@pytest.mark.parametrize("d", [2, 3, 4, 6])
def test_grad_norm_against_mpmath(d):
    mpmath.mp.dps = 25
    bump = lambda r: mpmath.exp(-1 / (1 - r * r))
    num = mpmath.quad(lambda r: 2 * r / (1 - r * r) ** 2 * bump(r) * r ** (d - 1), [0, 0.5, 1])
    den = mpmath.quad(lambda r: bump(r) * r ** (d - 1), [0, 0.5, 1])
    assert mollify.grad_l1_norm(d) == pytest.approx(float(num / den), rel=1e-9)
    assert mollify.grad_l1_norm(d) <= 2 * d


def test_grad_norm_range():
    with pytest.raises(BadParams):
        mollify.grad_l1_norm(7)
    with pytest.raises(BadParams):
        mollify.Mollifier(0)


def test_mollify_reproduces_affine_functions():
    rho = D.builtin("valley")
    u = lambda x, y: 3 * x - 2 * y + 1
    val = mollify.mollify(u, rho, 0.1, (0.7, 2.0))
    assert val == pytest.approx(u(0.7, 2.0), rel=1e-12)


def test_mollify_radius_and_theta_checks():
    rho = D.builtin("uniform", {"dim": 2})
    with pytest.raises(RadiusExceedsDomain):
        mollify.mollify(lambda x, y: x, rho, 0.2, (0.05, 0.5), u_domain=rho.domain)
    with pytest.raises(BadParams):
        mollify.mollify(lambda x: x, D.builtin("abs_eps", {"eps": 0.1}), 1.0, 0.0)
    with pytest.raises(BadParams):
        mollify.mollify(lambda x, y: x, rho, 0.1, (0.5, 0.5), quad_n=8)


def test_exceedance_against_quadrature():
    m = mollify.Mollifier(1)
    for s in (-0.7, -0.2, 0.0, 0.35, 0.9):
        ref, _ = integrate.quad(lambda y: m(y), s, 1, epsrel=1e-12)
        assert mollify.exceedance(s, 1) == pytest.approx(ref, abs=1e-8)
    assert mollify.exceedance(0.0, 2) == pytest.approx(0.5, abs=1e-10)
    s = np.linspace(-1.2, 1.2, 50)
    g = mollify.exceedance(s, 2)
    assert np.all(np.diff(g) <= 1e-12) and g[0] == 1.0 and g[-1] == 0.0


def test_sandwich_simple_case():
    f = lambda x: mollify.profile(x / 0.4)
    r = mollify.l1_sandwich_check(f, lambda x: 0.1 + 0.3 * np.sin(x), 0.3, [(-0.4, 0.4)])
    assert r.passed and r.lhs <= r.mid <= r.rhs
    with pytest.raises(BadParams):
        mollify.l1_sandwich_check(f, lambda x: 0 * x, 1.0, [(-0.4, 0.4)])


def test_halfplane_sparsity_uniform():
    rho = D.builtin("uniform", {"dim": 2})
    assert mollify.halfplane_sparsity(rho, ADM, mollify.HalfPlane(0, 0.5)) == pytest.approx(2.0)
    assert mollify.halfplane_sparsity(rho, ADM, mollify.HalfPlane(1, 0.25)) == pytest.approx(4.0)


def test_halfplane_witness_bounds_lambda2():
    rho = D.builtin("uniform", {"dim": 2})
    w = mollify.buser_witness_nd(rho, ADM, mollify.HalfPlane(0, 0.5), 0.25)
    assert abs(w.mean - 0.5) < 1e-6
    assert math.pi ** 2 <= w.rayleigh <= mollify.buser_bound_nd(2.0, 0.0, 2, ADM, 1.0, 1.0)


def test_halfplane_witness_1d_valley_like():
    rho = D.builtin("abs_eps", {"eps": 0.1})
    theta = mollify.buser_theta(0.1, 1.0, ADM, 1.0)
    w = mollify.buser_witness_nd(rho, ADM, mollify.HalfPlane(0, 0.0), theta)
    assert w.rayleigh >= oned.lambda2_1d_fem(rho, ADM).lambda2 * (1 - 1e-3)


def test_gridcut_witness_is_a_valid_test_function():
    rho = D.builtin("uniform", {"dim": 2})
    cut, rep, g = sweepcut.algorithm1(rho, ADM, 0.125)
    w = mollify.buser_witness_nd(rho, ADM, (g, cut), 0.2, panels=8, quad_n=6)
    assert w.rayleigh >= math.pi ** 2


def test_buser_theta_and_bound():
    assert mollify.buser_theta(1.0, 2.0, ADM, 1.0) == pytest.approx(0.5 / 8)
    assert mollify.buser_theta(1e-6, 2.0, ADM, 1.0) == pytest.approx(0.25)
    assert mollify.buser_bound_nd(0.5, 1.0, 2, ADM, 1.0, 1.0) == pytest.approx(3 * 8 * 2 * 2.0)
    with pytest.raises(BadParams):
        mollify.buser_witness_nd(D.builtin("valley"), ADM, mollify.HalfPlane(0, 1.0), 1.0)


def test_witness_norms_admissible_are_one():
    rho = D.builtin("valley")
    assert mollify.witness_norms(rho, ADM) == (1.0, 1.0)
