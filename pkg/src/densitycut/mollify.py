"""Variable-radius mollification and the test functions built from it.

The standard mollifier is ``phi(y) = c exp(-1 / (1 - |y|**2))`` on the open
unit ball, with ``c`` chosen so that ``phi`` has unit mass. Mollifying ``u``
with a radius proportional to the density,

    u_theta(x) = int_{B(0,1)} u(x - theta rho(x) y) phi(y) dy,

smooths a cut indicator into a test function whose Rayleigh quotient is
controlled by the cut's sparsity.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline
from scipy.special import gamma as gamma_fn

from . import quadrature
from .densities import Domain, ExponentTriple, mass, sup_power
from .errors import BadParams, RadiusExceedsDomain


def profile(r):
    """``exp(-1 / (1 - r**2))`` for ``|r| < 1`` and 0 elsewhere."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = np.abs(r) < 1
    out[inside] = np.exp(-1.0 / (1.0 - r[inside] ** 2))
    return out


def _radial_moment(k):
    """``int_0^1 profile(r) r**k dr``."""
    val, _ = integrate.quad(lambda r: math.exp(-1.0 / (1.0 - r * r)) * r ** k, 0.0, 1.0,
                            epsabs=0.0, epsrel=1e-13, limit=200)
    return val


def sphere_area(d):
    """Surface measure of the unit sphere in ``R^d`` (2 for ``d = 1``)."""
    return 2.0 * math.pi ** (d / 2) / gamma_fn(d / 2)


@dataclass(frozen=True)
class Mollifier:
    """Unit-mass radial bump on the unit ball of ``R^d``."""

    dim: int

    def __post_init__(self):
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise BadParams("dimension must be a positive integer")

    @functools.cached_property
    def c(self):
        return 1.0 / (sphere_area(self.dim) * _radial_moment(self.dim - 1))

    def __call__(self, *coords):
        r = np.sqrt(sum(np.asarray(x, dtype=float) ** 2 for x in coords))
        return self.c * profile(r)

    def grad_l1_norm(self):
        return grad_l1_norm(self.dim)


def grad_l1_norm(d):
    """``int_{R^d} |grad phi|`` for the standard mollifier.

    For ``d >= 2`` integration by parts along rays gives
    ``(d - 1) int profile r**(d-2) / int profile r**(d-1)``. In one dimension
    the total variation of the bump is twice its peak, ``2 c profile(0)``.
    """
    if not 1 <= d <= 6:
        raise BadParams("grad_l1_norm supports d = 1..6")
    if d == 1:
        return 2.0 * Mollifier(1).c * math.exp(-1.0)
    return (d - 1) * _radial_moment(d - 2) / _radial_moment(d - 1)


def _ball_rule(d, quad_n):
    """Tensor midpoint nodes in the unit ball with kernel weights summing to 1."""
    if quad_n < 2:
        raise BadParams("quad_n must be at least 2")
    t = -1.0 + (2.0 * np.arange(quad_n) + 1.0) / quad_n
    grids = np.meshgrid(*([t] * d), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    w = Mollifier(d)(*pts.T)
    keep = w > 0
    pts, w = pts[keep], w[keep]
    return pts, w / w.sum()


def _check_theta(density, theta):
    if not theta > 0:
        raise BadParams("theta must be positive")
    if theta * density.lipschitz >= 1:
        raise BadParams(f"theta * L = {theta * density.lipschitz:.3g} must be below 1")


def mollify(u, density, theta, x, quad_n=64, u_domain=None):
    """Value of ``u_theta`` at the point ``x``.

    ``u`` takes one coordinate array per axis. Kernel weights are normalized
    to sum to one, so constants are reproduced exactly. With ``u_domain`` a
    ball reaching outside it raises :class:`RadiusExceedsDomain`.
    """
    _check_theta(density, theta)
    if quad_n < 16:
        raise BadParams("quad_n must be at least 16")
    d = density.dim
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size != d:
        raise BadParams(f"point has {x.size} coordinates, density is {d}D")
    eta = theta * float(density(*x))
    if u_domain is not None:
        for xi, (lo, hi) in zip(x, u_domain.bounds):
            if xi - eta < lo or xi + eta > hi:
                raise RadiusExceedsDomain(f"ball of radius {eta:.3g} at {x} leaves the domain of u")
    pts, w = _ball_rule(d, quad_n)
    vals = u(*(x[k] - eta * pts[:, k] for k in range(d)))
    return float(np.dot(w, vals))


# ---------------------------------------------------------------- L1 sandwich

@dataclass
class SandwichResult:
    lhs: float
    mid: float
    rhs: float
    norm: float
    passed: bool


def l1_sandwich_check(f, delta, c, support, quad_n=32, x_nodes=None, qtol=0.01):
    """Numerical check of ``|f|_1/(1+c) <= int int |f(x - delta(x) y)| phi(y) <= |f|_1/(1-c)``.

    Parameters
    ----------
    f, delta : vectorized functions of one array per axis.
    c : declared Lipschitz constant of ``delta``, below 1.
    support : box (sequence of ``(lo, hi)``) containing the support of ``f``.
    quad_n : midpoint nodes per axis of the kernel rule.
    x_nodes : Gauss nodes per axis for the outer integral (default 2048 in
        1D, 160 in 2D).
    qtol : relative slack on each inequality.

    Any ``x`` that sees the support satisfies ``|x - s| <= |delta(x)|`` for
    some ``s`` in it, hence ``|x - s| <= max |delta(support)| / (1 - c)``;
    the outer integral runs over the support expanded by that margin.
    """
    if not 0 <= c < 1:
        raise BadParams("c must lie in [0, 1)")
    box = Domain(tuple(support))
    d = box.dim
    x_nodes = x_nodes or (2048 if d == 1 else 160)
    probe = [np.linspace(lo, hi, 257) for lo, hi in box.bounds]
    grids = np.meshgrid(*probe, indexing="ij")
    dmax = float(np.max(np.abs(delta(*grids))))
    margin = 1.02 * dmax / (1 - c) + 1e-12
    outer = [(lo - margin, hi + margin) for lo, hi in box.bounds]

    def tensor_rule(bounds, nodes_per_axis):
        axes = []
        for lo, hi in bounds:
            edges = np.linspace(lo, hi, nodes_per_axis // 8 + 1)
            xs, ws = quadrature.gauss_panels(edges)
            axes.append((xs.ravel(), ws.ravel()))
        if d == 1:
            return [axes[0][0]], axes[0][1]
        X, Y = np.meshgrid(axes[0][0], axes[1][0], indexing="ij")
        W = np.outer(axes[0][1], axes[1][1])
        return [X.ravel(), Y.ravel()], W.ravel()

    xs, wx = tensor_rule(box.bounds, x_nodes)
    norm = float(np.dot(wx, np.abs(f(*xs))))
    xo, wo = tensor_rule(outer, x_nodes)
    pts, wk = _ball_rule(d, quad_n)
    dv = delta(*xo)
    mid = 0.0
    for k in range(pts.shape[0]):
        shifted = [xo[a] - dv * pts[k, a] for a in range(d)]
        mid += wk[k] * float(np.dot(wo, np.abs(f(*shifted))))
    lhs, rhs = norm / (1 + c), norm / (1 - c)
    passed = lhs <= mid * (1 + qtol) and mid <= rhs * (1 + qtol)
    return SandwichResult(lhs, float(mid), rhs, norm, bool(passed))


# ---------------------------------------------------------------- witness

@functools.lru_cache(maxsize=None)
def _exceedance(d):
    """Spline of ``G(s) = P(y_1 > s)`` for ``y`` distributed as the mollifier."""
    moll = Mollifier(d)
    edges = np.linspace(-1.0, 1.0, 257)
    nodes, weights = quadrature.gauss_panels(edges)
    if d == 1:
        marg = moll.c * profile(nodes)
    elif d == 2:
        def m(t):
            top = math.sqrt(max(1.0 - t * t, 0.0))
            if top == 0.0:
                return 0.0
            val, _ = integrate.quad(lambda v: math.exp(-1.0 / (1.0 - t * t - v * v))
                                    if t * t + v * v < 1 else 0.0, 0.0, top,
                                    epsabs=0.0, epsrel=1e-12, limit=200)
            return 2.0 * moll.c * val
        marg = np.vectorize(m)(nodes)
    else:
        raise BadParams("half-plane witnesses are implemented for d = 1, 2")
    per_panel = np.sum(marg * weights, axis=1)
    cdf = np.concatenate([[0.0], np.cumsum(per_panel)])
    cdf /= cdf[-1]
    return CubicSpline(edges, 1.0 - cdf, bc_type=((1, 0.0), (1, 0.0)))


def exceedance(s, d):
    """``P(y_1 > s)`` under the ``d``-dimensional mollifier."""
    s = np.asarray(s, dtype=float)
    spline = _exceedance(d)
    return np.where(s <= -1, 1.0, np.where(s >= 1, 0.0, spline(np.clip(s, -1, 1))))


@dataclass(frozen=True)
class HalfPlane:
    """The set ``{x : x[axis] < offset}``."""

    axis: int
    offset: float

    def indicator(self, *coords):
        return (np.asarray(coords[self.axis]) < self.offset).astype(float)


def halfplane_sparsity(density, exponents, cut, rtol=1e-9):
    """Sparsity of an axis-aligned cut: perimeter integral of ``rho**beta`` over the min side mass."""
    ex = ExponentTriple.of(exponents)
    bounds = density.domain.bounds
    lo, hi = bounds[cut.axis]
    if not lo < cut.offset < hi:
        raise BadParams("the cut must cross the domain")
    left = list(bounds)
    right = list(bounds)
    left[cut.axis] = (lo, cut.offset)
    right[cut.axis] = (cut.offset, hi)
    m_left = mass(density, ex.alpha, Domain(tuple(left)), rtol=rtol)
    m_right = mass(density, ex.alpha, Domain(tuple(right)), rtol=rtol)
    if density.dim == 1:
        perim = float(density.power(ex.beta)(np.array([cut.offset]))[0])
    else:
        other = 1 - cut.axis
        olo, ohi = bounds[other]

        def g(t):
            coords = [None, None]
            coords[cut.axis] = np.full_like(t, cut.offset)
            coords[other] = t
            return density.power(ex.beta)(*coords)

        perim = quadrature.integrate_pieces(g, density.axis_breakpoints(other, olo, ohi),
                                            rtol=rtol)
    return perim / min(m_left, m_right)


def buser_theta(phi, L, exponents, sup_a1b):
    """``(1/2) min(1 / (2^(beta+1) |rho^(alpha+1-beta)| phi), 1 / L)``."""
    ex = ExponentTriple.of(exponents)
    a = 1.0 / (2.0 ** (ex.beta + 1) * sup_a1b * phi) if phi > 0 else math.inf
    b = 1.0 / L if L > 0 else math.inf
    theta = 0.5 * min(a, b)
    if not math.isfinite(theta):
        raise BadParams("theta is unbounded: zero sparsity and zero Lipschitz constant")
    return theta


@dataclass
class WitnessResult:
    rayleigh: float
    numerator: float
    denominator: float
    mean: float
    theta: float


def _graded_edges(lo, hi, centre, w0, ratio=1.25, uniform=64):
    """Panel edges on ``[lo, hi]`` that shrink geometrically towards ``centre``."""
    pts = set(np.linspace(lo, hi, uniform + 1).tolist())
    if lo < centre < hi:
        pts.add(centre)
        for side in (-1, 1):
            w = w0
            while True:
                p = centre + side * w
                if not lo < p < hi:
                    break
                pts.add(p)
                w *= ratio
    return np.array(sorted(pts))


def _fd_rayleigh(density, ex, u_theta, nodes, weights, theta):
    """Rayleigh quotient of ``u_theta`` minus its weighted mean, gradient by central differences."""
    d = density.dim
    rho = density(*nodes)
    hfd = 1e-4 * theta * rho
    hfd = np.where(hfd > 0, hfd, 1e-12)
    u0 = u_theta(*nodes)
    grad2 = np.zeros_like(u0)
    for a in range(d):
        plus = [n.copy() for n in nodes]
        minus = [n.copy() for n in nodes]
        plus[a] = plus[a] + hfd
        minus[a] = minus[a] - hfd
        g = (u_theta(*plus) - u_theta(*minus)) / (2 * hfd)
        grad2 += g * g
    ra = _pow(rho, ex.alpha)
    rg = _pow(rho, ex.gamma)
    total = np.dot(weights, ra)
    mean = np.dot(weights, ra * u0) / total
    num = float(np.dot(weights, rg * grad2))
    den = float(np.dot(weights, ra * (u0 - mean) ** 2))
    return WitnessResult(num / den if den > 0 else math.inf, num, den, float(mean), theta)


def _pow(v, p):
    return np.ones_like(v) if p == 0 else np.asarray(v, dtype=float) ** p


def _tensor_nodes(edges_per_axis):
    axes = [quadrature.gauss_panels(e) for e in edges_per_axis]
    axes = [(x.ravel(), w.ravel()) for x, w in axes]
    if len(axes) == 1:
        return [axes[0][0]], axes[0][1]
    X, Y = np.meshgrid(axes[0][0], axes[1][0], indexing="ij")
    W = np.outer(axes[0][1], axes[1][1])
    return [X.ravel(), Y.ravel()], W.ravel()


def buser_witness_nd(density, exponents, cut, theta, panels=64, quad_n=16):
    """Rayleigh quotient of the mollified cut indicator, centred by its ``rho**alpha`` mean.

    ``cut`` is a :class:`HalfPlane` or a ``(Grid2D, GridCut)`` pair. Half-planes use
    the closed form ``u_theta(x) = G((x_axis - offset) / (theta rho(x)))`` with
    ``G`` the tabulated exceedance of the kernel marginal, and Gauss panels
    graded towards the interface. Grid cuts are mollified by a fixed-node
    convolution over sub-cell midpoints, which keeps ``u_theta`` smooth in
    ``x`` so that central differences are meaningful.
    """
    ex = ExponentTriple.of(exponents)
    _check_theta(density, theta)
    if theta * density.lipschitz > 0.5 + 1e-12:
        raise BadParams("the witness needs theta * L <= 1/2")
    if isinstance(cut, HalfPlane):
        return _halfplane_witness(density, ex, cut, theta, panels)
    grid, gcut = cut
    return _gridcut_witness(density, ex, grid, gcut, theta, panels, quad_n)


def _halfplane_witness(density, ex, cut, theta, panels):
    d = density.dim
    bounds = density.domain.bounds
    if d == 1:
        line_rho = float(density(np.array([cut.offset]))[0])
    else:
        other = 1 - cut.axis
        t = np.linspace(*bounds[other], 513)
        coords = [None, None]
        coords[cut.axis] = np.full_like(t, cut.offset)
        coords[other] = t
        line_rho = float(np.min(density(*coords)))
    w0 = max(theta * line_rho / 8, 1e-14 * (bounds[cut.axis][1] - bounds[cut.axis][0]))
    edges = []
    for a, (lo, hi) in enumerate(bounds):
        if a == cut.axis:
            edges.append(_graded_edges(lo, hi, cut.offset, w0, uniform=panels))
        else:
            edges.append(np.union1d(np.linspace(lo, hi, panels + 1),
                                    density.axis_breakpoints(a)))
    nodes, weights = _tensor_nodes(edges)

    def u_theta(*coords):
        eta = theta * density(*coords)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = (np.asarray(coords[cut.axis]) - cut.offset) / eta
        s = np.where(eta > 0, s, np.sign(np.asarray(coords[cut.axis]) - cut.offset) * 2.0)
        return exceedance(s, d)

    return _fd_rayleigh(density, ex, u_theta, nodes, weights, theta)


def _gridcut_witness(density, ex, grid, gcut, theta, panels, quad_n):
    if density.dim != 2:
        raise BadParams("grid cuts need a 2D density")
    in_a = grid.as_mask(gcut.members).reshape(grid.shape)
    (x0, x1), (y0, y1) = density.domain.bounds
    h = grid.h
    # sub-cell lattice: quad_n nodes per cell side
    s = h / quad_n
    zx = x0 - h / 2 + s * (np.arange((grid.n + 1) * quad_n) + 0.5)
    zy = y0 - h / 2 + s * (np.arange((grid.m + 1) * quad_n) + 0.5)
    ci = np.clip(np.floor((zx - (x0 - h / 2)) / h).astype(int), 0, grid.n)
    cj = np.clip(np.floor((zy - (y0 - h / 2)) / h).astype(int), 0, grid.m)
    lattice = in_a[ci[:, None], cj[None, :]].astype(float)

    def u_theta(X, Y):
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        eta = theta * density(X, Y)
        out = np.empty_like(X)
        flat_x, flat_y, flat_e = X.ravel(), Y.ravel(), eta.ravel()
        res = out.ravel()
        for k in range(flat_x.size):
            e = flat_e[k]
            ia = np.searchsorted(zx, flat_x[k] - e)
            ib = np.searchsorted(zx, flat_x[k] + e)
            ja = np.searchsorted(zy, flat_y[k] - e)
            jb = np.searchsorted(zy, flat_y[k] + e)
            if e <= 0 or ib - ia < 1 or jb - ja < 1:
                i = min(max(int(round((flat_x[k] - x0) / h)), 0), grid.n)
                j = min(max(int(round((flat_y[k] - y0) / h)), 0), grid.m)
                res[k] = float(in_a[i, j])
                continue
            dx = (flat_x[k] - zx[ia:ib]) / e
            dy = (flat_y[k] - zy[ja:jb]) / e
            w = profile(np.sqrt(dx[:, None] ** 2 + dy[None, :] ** 2))
            tot = w.sum()
            res[k] = float((w * lattice[ia:ib, ja:jb]).sum() / tot) if tot > 0 else \
                float(lattice[min(ia, zx.size - 1), min(ja, zy.size - 1)])
        return out

    edges = [np.linspace(x0, x1, panels + 1), np.linspace(y0, y1, panels + 1)]
    nodes, weights = _tensor_nodes(edges)
    return _fd_rayleigh(density, ex, u_theta, nodes, weights, theta)


def buser_bound_nd(phi, L, d, exponents, sup_g1b, sup_a1b):
    """``3 2^(beta+1) d |rho^(gamma-beta-1)| max(L phi, 2^(beta+1) |rho^(alpha+1-beta)| phi**2)``."""
    ex = ExponentTriple.of(exponents)
    p = 2.0 ** (ex.beta + 1)
    return 3.0 * p * d * sup_g1b * max(L * phi, p * sup_a1b * phi * phi)


def witness_norms(density, exponents):
    """``(sup rho^(gamma-beta-1), sup rho^(alpha+1-beta))`` for the bounds above."""
    ex = ExponentTriple.of(exponents)
    return (sup_power(density, ex.gamma - ex.beta - 1),
            sup_power(density, ex.alpha + 1 - ex.beta))
