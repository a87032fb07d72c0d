"""Composite quadrature rules used throughout the package."""
import numpy as np

from .errors import NonIntegrable

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def midpoint(f, a, b, panels):
    """Composite midpoint rule of ``f`` on ``[a, b]`` with ``panels`` panels."""
    h = (b - a) / panels
    x = a + h * (np.arange(panels) + 0.5)
    return h * float(np.sum(f(x)))


def integrate(f, a, b, rtol=1e-8, atol=1e-300, start=64, max_panels=2**24):
    """Integrate a vectorized ``f`` over ``[a, b]`` by dyadic midpoint refinement.

    The panel count doubles until two successive estimates agree to ``rtol``.
    Raises :class:`NonIntegrable` when the cap is hit without agreement, which
    in practice means the integrand is unbounded.
    """
    if b == a:
        return 0.0
    if b < a:
        return -integrate(f, b, a, rtol, atol, start, max_panels)
    panels = start
    prev = midpoint(f, a, b, panels)
    while panels < max_panels:
        panels *= 2
        cur = midpoint(f, a, b, panels)
        if not np.isfinite(cur):
            raise NonIntegrable(f"non-finite integral on [{a}, {b}]")
        if abs(cur - prev) <= max(rtol * abs(cur), atol):
            return cur
        prev = cur
    raise NonIntegrable(f"midpoint refinement did not settle on [{a}, {b}] "
                        f"after {max_panels} panels")


def integrate_pieces(f, breakpoints, rtol=1e-8, **kw):
    """Sum of :func:`integrate` over consecutive intervals of ``breakpoints``."""
    pts = np.unique(np.asarray(breakpoints, dtype=float))
    return float(sum(integrate(f, lo, hi, rtol=rtol, **kw)
                     for lo, hi in zip(pts[:-1], pts[1:])))


def gauss_panels(edges):
    """Nodes and weights of 8-point Gauss-Legendre on each panel of ``edges``."""
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + hi) * 0.5 + half * _GL_NODES[None, :]
    weights = half * _GL_WEIGHTS[None, :]
    return nodes, weights


def cumulative_gauss(f, edges):
    """Integrals of ``f`` from ``edges[0]`` to each entry of ``edges``.

    Each panel is integrated with 8-point Gauss-Legendre, so ``f`` should be
    smooth inside every panel; put kinks on panel edges.
    """
    nodes, weights = gauss_panels(edges)
    per_panel = np.sum(f(nodes.ravel()).reshape(nodes.shape) * weights, axis=1)
    return np.concatenate([[0.0], np.cumsum(per_panel)])
