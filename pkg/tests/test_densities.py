import math

import numpy as np
import pytest
from scipy import integrate

from densitycut import densities as D
from densitycut.errors import BadParams, OutsideDomain, UnknownFamily


def test_exponent_triple():
    ex = D.ExponentTriple.of((1, 2, 3))
    assert ex.admissible and ex.as_tuple() == (1.0, 2.0, 3.0)
    assert not D.ExponentTriple.of((1, 1, 1)).admissible
    with pytest.raises(BadParams):
        D.ExponentTriple(-1, 0, 0)


def test_domain_rejects_empty_axis():
    with pytest.raises(BadParams):
        D.Domain(((1.0, 1.0),))


def test_unknown_family_and_missing_param():
    with pytest.raises(UnknownFamily):
        D.builtin("nope")
    with pytest.raises(BadParams):
        D.builtin("abs_eps")


def test_abs_eps_values_and_mass():
    rho = D.builtin("abs_eps", {"eps": 0.01})
    np.testing.assert_allclose(rho(np.array([-1.0, 0.0, 0.5])), [1.01, 0.01, 0.51])
    ref, _ = integrate.quad(lambda x: abs(x) + 0.01, -1, 1, points=[0])
    assert D.mass(rho, 1.0) == pytest.approx(ref, rel=1e-8)


def test_plateau_shape():
    rho = D.builtin("plateau", {"n": 10})
    assert float(rho(np.array([0.0]))[0]) == pytest.approx(0.1)
    lo, hi = rho.domain.bounds[0]
    assert float(rho(np.array([hi]))[0]) == pytest.approx(0.0, abs=1e-15)
    # mass: plateau of width n and height 1/n plus two ramps of area 1/(2 n^2)
    assert D.mass(rho, 1.0) == pytest.approx(1.0 + 1.0 / 100, rel=1e-8)


def test_mass_2d_against_dblquad():
    rho = D.builtin("valley")
    ref, _ = integrate.dblquad(lambda y, x: float(rho(np.array(x), np.array(y))) ** 2,
                               0.0, 2.0, 0.0, 6.0, epsrel=1e-9)
    assert D.mass(rho, 2.0) == pytest.approx(ref, rel=1e-6)


def test_decay_extension_and_reject():
    rho = D.builtin("valley")
    inside = float(rho(np.array(2.0), np.array(3.0)))
    outside = float(rho(np.array(2.1), np.array(3.0)))
    assert outside == pytest.approx(inside - 0.1)
    tab = D.tabulated(np.ones(5), 0.25)
    with pytest.raises(OutsideDomain):
        tab(np.array([2.0]))


def test_lipschitz_estimate_below_declared():
    for name, params in [("abs_eps", {"eps": 0.1}), ("valley", {})]:
        rho = D.builtin(name, params)
        est = D.estimate_lipschitz(rho)
        assert 0.8 * rho.lipschitz <= est <= rho.lipschitz * (1 + 1e-9)
    # the two moons' slope bounds are added, so the declared value is loose
    moons = D.builtin("half_moons")
    assert D.estimate_lipschitz(moons) <= moons.lipschitz


def test_sup_power_negative_exponent():
    rho = D.builtin("plateau", {"n": 4})
    assert D.sup_power(rho, -1.0) == math.inf
    assert D.sup_power(rho, 2.0) == pytest.approx(1 / 16)


def test_scale_relation():
    rho = D.builtin("abs_eps", {"eps": 0.05})
    hat = D.scale(rho, 2.0, 0.5)
    x = np.linspace(-1, 1, 9)
    np.testing.assert_allclose(0.5 * hat(2.0 * x), 2.0 * rho(x))
    assert hat.lipschitz == pytest.approx(2.0)


def test_counterexample_box_and_density():
    X, Y = D.counterexample_box(64)
    assert (X, Y) == pytest.approx((0.8, 80.0))
    rho = D.builtin("counterexample2d", {"n": 64, "eps": 1e-4})
    assert float(rho(np.array(0.0), np.array(5.0))) == pytest.approx(1e-4)
    assert float(rho(np.array(0.5), np.array(-5.0))) == pytest.approx(1 / 64)


def test_tabulated_roundtrip(tmp_path):
    samples = np.arange(12, dtype=float).reshape(3, 4) + 1
    path = tmp_path / "t.txt"
    D.save_tabulated(path, samples, 0.5, (1.0, 2.0))
    rho = D.load_tabulated(path)
    assert float(rho(np.array(1.5), np.array(3.0))) == pytest.approx(samples[1, 2])
    assert float(rho(np.array(1.25), np.array(2.0))) == pytest.approx(0.5 * (samples[0, 0] + samples[1, 0]))


def test_from_spec_rejects_unknown_keys():
    with pytest.raises(BadParams):
        D.from_spec({"family": "uniform", "colour": 1})
    assert D.from_spec({"family": "uniform", "params": {"dim": 2}}).dim == 2
