import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from densitycut import quadrature
from densitycut.errors import NonIntegrable


def test_midpoint_exact_on_linear():
    assert quadrature.midpoint(lambda x: 3 * x + 1, 0.0, 2.0, 5) == pytest.approx(8.0, rel=1e-15)


def test_integrate_smooth():
    assert quadrature.integrate(np.sin, 0.0, np.pi, rtol=1e-12) == pytest.approx(2.0, rel=1e-10)


def test_integrate_reversed_and_empty():
    assert quadrature.integrate(np.exp, 1.0, 0.0) == pytest.approx(-(np.e - 1), rel=1e-7)
    assert quadrature.integrate(np.exp, 1.0, 1.0) == 0.0


def test_integrate_unbounded_raises():
    with pytest.raises(NonIntegrable):
        quadrature.integrate(lambda x: 1.0 / x, 0.0, 1.0, max_panels=2**14)


def test_integrate_pieces_with_kink():
    val = quadrature.integrate_pieces(np.abs, [-1.0, 0.0, 2.0], rtol=1e-12)
    assert val == pytest.approx(2.5, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 15), st.floats(-2, 2), st.floats(0.1, 3))
def test_gauss_panels_exact_on_polynomials(k, a, width):
    # 8-point Gauss-Legendre integrates degree <= 15 exactly on each panel.
    b = a + width
    nodes, weights = quadrature.gauss_panels(np.linspace(a, b, 4))
    got = float(np.sum(nodes ** k * weights))
    want = (b ** (k + 1) - a ** (k + 1)) / (k + 1)
    assert got == pytest.approx(want, rel=1e-11, abs=1e-11)


def test_cumulative_gauss():
    edges = np.linspace(0, 1, 11)
    cum = quadrature.cumulative_gauss(lambda x: 2 * x, edges)
    np.testing.assert_allclose(cum, edges ** 2, atol=1e-14)
