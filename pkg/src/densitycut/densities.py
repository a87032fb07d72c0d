"""Density functions on boxes, with quadrature and Lipschitz estimates.

A :class:`Density` wraps a vectorized nonnegative function on a 1D interval or
a 2D rectangle. Builtins carry their analytic Lipschitz constant and the
locations of their kinks, which the quadrature routines use as breakpoints.

>>> rho = builtin("abs_eps", {"eps": 0.01})
>>> round(eval_density(rho, 0.5), 12)
0.51
>>> round(mass(rho, 1.0, Domain(((0.0, 1.0),))), 10)
0.51
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import quadrature
from .errors import BadParams, NonIntegrable, OutsideDomain, UnknownFamily


@dataclass(frozen=True)
class Domain:
    """Axis-aligned box ``bounds[k] = (lower, upper)`` in one or two dimensions."""

    bounds: tuple

    def __post_init__(self):
        b = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if len(b) not in (1, 2):
            raise BadParams(f"domains are 1D or 2D, got {len(b)} axes")
        for lo, hi in b:
            if not lo < hi:
                raise BadParams(f"empty axis interval ({lo}, {hi})")
        object.__setattr__(self, "bounds", b)

    @property
    def dim(self):
        return len(self.bounds)

    @property
    def lengths(self):
        return tuple(hi - lo for lo, hi in self.bounds)

    @property
    def volume(self):
        return math.prod(self.lengths)

    def contains(self, *coords, atol=0.0):
        inside = True
        for c, (lo, hi) in zip(coords, self.bounds):
            c = np.asarray(c)
            inside = inside & (c >= lo - atol) & (c <= hi + atol)
        return inside

    def scaled(self, ell):
        return Domain(tuple((ell * lo, ell * hi) for lo, hi in self.bounds))


@dataclass(frozen=True)
class ExponentTriple:
    """Exponents on the mass (alpha), perimeter (beta) and stiffness (gamma) weights."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            v = float(getattr(self, name))
            if not v >= 0:
                raise BadParams(f"{name} must be nonnegative, got {v}")
            object.__setattr__(self, name, v)

    @classmethod
    def of(cls, value):
        if isinstance(value, ExponentTriple):
            return value
        a, b, g = value
        return cls(a, b, g)

    @property
    def admissible(self):
        """True on the line beta = alpha + 1, gamma = alpha + 2."""
        return self.beta == self.alpha + 1 and self.gamma == self.alpha + 2

    def as_tuple(self):
        return (self.alpha, self.beta, self.gamma)


@dataclass(frozen=True, eq=False)
class Density:
    """A nonnegative function on a box.

    ``func`` takes one array per axis and broadcasts. ``lipschitz`` is the
    declared constant, ``kinks`` holds per-axis coordinates where the function
    is not smooth. ``extension`` controls evaluation outside the box:
    ``"formula"`` (``func`` is valid on all of R^d), ``"decay"`` (value at the
    nearest box point minus the distance to the box, floored at zero) or
    ``"reject"``.
    """

    domain: Domain
    func: object = field(repr=False)
    lipschitz: float
    name: str = "custom"
    params: dict = field(default_factory=dict)
    kinks: tuple = ()
    extension: str = "decay"

    @property
    def dim(self):
        return self.domain.dim

    def __call__(self, *coords):
        if len(coords) != self.dim:
            raise ValueError(f"{self.name} is {self.dim}D, got {len(coords)} coordinates")
        coords = [np.asarray(c, dtype=float) for c in coords]
        if self.extension == "formula":
            return np.maximum(self.func(*coords), 0.0)
        inside = self.domain.contains(*coords)
        if np.all(inside):
            return np.maximum(self.func(*coords), 0.0)
        if self.extension == "reject":
            raise OutsideDomain(f"{self.name} evaluated outside {self.domain.bounds}")
        clipped = [np.clip(c, lo, hi) for c, (lo, hi) in zip(coords, self.domain.bounds)]
        dist = np.sqrt(sum((c - q) ** 2 for c, q in zip(coords, clipped)))
        return np.maximum(self.func(*clipped) - dist, 0.0)

    def power(self, p):
        """Vectorized ``rho ** p`` with the convention ``0 ** 0 = 1``."""
        return lambda *c: _pow(self(*c), p)

    def axis_breakpoints(self, axis, lo=None, hi=None):
        """Box edges along ``axis`` plus every kink strictly inside them."""
        blo, bhi = self.domain.bounds[axis]
        lo = blo if lo is None else lo
        hi = bhi if hi is None else hi
        ks = self.kinks[axis] if len(self.kinks) > axis else ()
        inner = [k for k in ks if lo < k < hi]
        return np.array(sorted({lo, hi, *inner}))


def _pow(values, p):
    values = np.asarray(values, dtype=float)
    if p == 0:
        return np.ones_like(values)
    if p < 0:
        with np.errstate(divide="ignore"):
            return np.where(values > 0, values, 0.0) ** p
    return values ** p


def eval_density(density, point):
    """Value of ``density`` at one point (scalar for 1D, pair for 2D)."""
    coords = np.atleast_1d(np.asarray(point, dtype=float))
    return float(density(*coords))


# ---------------------------------------------------------------- builtins

def _uniform(params):
    dim = int(params.get("dim", 1))
    value = float(params.get("value", 1.0))
    if value < 0:
        raise BadParams("uniform value must be nonnegative")
    bounds = params.get("bounds", ((0.0, 1.0),) * dim)
    dom = Domain(tuple(bounds))
    if dom.dim == 1:
        func = lambda x: np.full(np.shape(x), value)
    else:
        func = lambda x, y: np.full(np.broadcast(x, y).shape, value)
    return Density(dom, func, 0.0, "uniform", {"dim": dom.dim, "value": value}, ())


def _plateau(params):
    n = float(params["n"])
    if n < 1:
        raise BadParams("plateau needs n >= 1")
    top, half = 1.0 / n, n / 2.0
    edge = half + top
    func = lambda x: np.clip(edge - np.abs(x), 0.0, top)
    dom = Domain(((-edge, edge),))
    return Density(dom, func, 1.0, "plateau", {"n": n},
                   ((-edge, -half, half, edge),), extension="formula")


def _abs_eps(params):
    eps = float(params["eps"])
    if eps <= 0:
        raise BadParams("abs_eps needs eps > 0")
    if eps >= 0.25:
        warnings.warn(f"eps={eps} is outside the range (0, 1/4) the example is built for",
                      stacklevel=3)

    def func(x):
        ax = np.abs(x)
        return np.where(ax <= 1.0, ax + eps, np.maximum(0.0, 2.0 + eps - ax))

    return Density(Domain(((-1.0, 1.0),)), func, 1.0, "abs_eps", {"eps": eps},
                   ((0.0,),), extension="formula")


def _smooth_abs_eps(params):
    eps = float(params["eps"])
    if eps <= 0:
        raise BadParams("smooth_abs_eps needs eps > 0")
    func = lambda x: np.sqrt(np.asarray(x) ** 2 + eps ** 2)
    return Density(Domain(((-1.0, 1.0),)), func, 1.0 / math.sqrt(1.0 + eps ** 2),
                   "smooth_abs_eps", {"eps": eps}, ((0.0,),))


def counterexample_box(n, parametrization="statement"):
    """Half-widths ``(X, Y)`` of the counterexample box for cap height ``1/n``."""
    if parametrization == "statement":
        return math.sqrt(n) / 10.0, 10.0 * math.sqrt(n)
    if parametrization == "proof":
        return 1.0 / (10.0 * math.sqrt(n)), 10.0 / math.sqrt(n)
    raise BadParams(f"unknown parametrization {parametrization!r}")


def _counterexample2d(params):
    eps = float(params["eps"])
    n = float(params["n"])
    if eps <= 0 or n < 1:
        raise BadParams("counterexample2d needs eps > 0 and n >= 1")
    par = params.get("parametrization", "statement")
    X0, Y0 = counterexample_box(n, par)
    X = float(params.get("X", X0))
    Y = float(params.get("Y", Y0))
    cap = 1.0 / n
    func = lambda x, y: np.minimum(eps + np.abs(x), cap) + 0.0 * np.asarray(y)
    kx = sorted({0.0, *(s * (cap - eps) for s in (-1, 1) if 0 < cap - eps < X)})
    return Density(Domain(((-X, X), (-Y, Y))), func, 1.0, "counterexample2d",
                   {"eps": eps, "n": n, "X": X, "Y": Y, "parametrization": par},
                   (tuple(kx), ()))


def _arc_distance(px, py, cx, cy, r, upper):
    """Distance from points to a half circle (upper or lower half)."""
    dx, dy = px - cx, py - cy
    on_side = dy >= 0 if upper else dy <= 0
    radial = np.abs(np.hypot(dx, dy) - r)
    end = np.minimum(np.hypot(dx - r, dy), np.hypot(dx + r, dy))
    return np.where(on_side, radial, end)


def _gauss(dist, sigma):
    return np.exp(-0.5 * (dist / sigma) ** 2)


def _half_moons(params):
    sigma = float(params.get("noise", 0.1))
    floor = float(params.get("floor", 0.02))
    if sigma <= 0 or floor < 0:
        raise BadParams("half_moons needs noise > 0 and floor >= 0")

    def func(x, y):
        d1 = _arc_distance(x, y, 0.0, 0.0, 1.0, upper=True)
        d2 = _arc_distance(x, y, 1.0, 0.5, 1.0, upper=False)
        return floor + _gauss(d1, sigma) + _gauss(d2, sigma)

    L = 2.0 / (sigma * math.sqrt(math.e))
    return Density(Domain(((-1.5, 2.5), (-1.0, 1.5))), func, L, "half_moons",
                   {"noise": sigma, "floor": floor})


def _circles(params):
    sigma = float(params.get("noise", 0.1))
    floor = float(params.get("floor", 0.02))
    if sigma <= 0 or floor < 0:
        raise BadParams("circles needs noise > 0 and floor >= 0")

    def func(x, y):
        r = np.hypot(x, y)
        return floor + _gauss(r - 1.0, sigma) + _gauss(r - 0.45, sigma)

    L = 2.0 / (sigma * math.sqrt(math.e))
    return Density(Domain(((-1.6, 1.6), (-1.6, 1.6))), func, L, "circles",
                   {"noise": sigma, "floor": floor})


def _valley(params):
    width = float(params.get("width", 0.15))
    floor = float(params.get("floor", 0.05))
    breadth = float(params.get("breadth", 2.0))
    length = float(params.get("length", 6.0))
    if width <= 0 or not 0 <= floor < 1:
        raise BadParams("valley needs width > 0 and 0 <= floor < 1")
    c = breadth / 2.0

    def func(x, y):
        prof = 1.0 - np.exp(-0.5 * ((np.asarray(x) - c) / width) ** 2)
        return floor + (1.0 - floor) * prof + 0.0 * np.asarray(y)

    L = (1.0 - floor) / (width * math.sqrt(math.e))
    return Density(Domain(((0.0, breadth), (0.0, length))), func, L, "valley",
                   {"width": width, "floor": floor, "breadth": breadth, "length": length})


def _tabulated(params):
    if "file" in params:
        return load_tabulated(params["file"], interpolate=params.get("interpolate", True))
    return tabulated(np.asarray(params["samples"], dtype=float), float(params["h"]),
                     tuple(params.get("origin", (0.0, 0.0))),
                     interpolate=params.get("interpolate", True))


FAMILIES = {
    "uniform": _uniform,
    "plateau": _plateau,
    "abs_eps": _abs_eps,
    "smooth_abs_eps": _smooth_abs_eps,
    "counterexample2d": _counterexample2d,
    "half_moons": _half_moons,
    "circles": _circles,
    "valley": _valley,
    "tabulated": _tabulated,
}


def builtin(name, params=None):
    """Construct a builtin density family by name."""
    try:
        factory = FAMILIES[name]
    except KeyError:
        raise UnknownFamily(name) from None
    try:
        return factory(dict(params or {}))
    except KeyError as exc:
        raise BadParams(f"{name} is missing parameter {exc.args[0]!r}") from None


def from_spec(spec):
    """Build a density from a job-file mapping ``{"family": ..., "params": {...}}``."""
    unknown = set(spec) - {"family", "params"}
    if unknown:
        raise BadParams(f"unknown density keys {sorted(unknown)}")
    return builtin(spec["family"], spec.get("params", {}))


# ---------------------------------------------------------------- tabulated

def tabulated(samples, h, origin=(0.0, 0.0), interpolate=True):
    """Density given by samples on a regular grid of spacing ``h``.

    With ``interpolate`` the density is (bi)linear between samples; without it
    only grid nodes may be queried.
    """
    samples = np.asarray(samples, dtype=float)
    if np.any(samples < 0) or not np.all(np.isfinite(samples)):
        raise BadParams("tabulated samples must be finite and nonnegative")
    if samples.ndim == 1:
        x0 = float(origin[0])
        xs = x0 + h * np.arange(samples.size)
        dom = Domain(((xs[0], xs[-1]),))

        def func(x):
            x = np.asarray(x, dtype=float)
            if not interpolate:
                _require_nodes(x, x0, h)
            return np.interp(x, xs, samples)

        L = float(np.max(np.abs(np.diff(samples))) / h) if samples.size > 1 else 0.0
        kinks = (tuple(xs[1:-1]),)
    elif samples.ndim == 2:
        from scipy.interpolate import RegularGridInterpolator

        x0, y0 = float(origin[0]), float(origin[1])
        xs = x0 + h * np.arange(samples.shape[0])
        ys = y0 + h * np.arange(samples.shape[1])
        dom = Domain(((xs[0], xs[-1]), (ys[0], ys[-1])))
        interp = RegularGridInterpolator((xs, ys), samples, method="linear")

        def func(x, y):
            x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
            if not interpolate:
                _require_nodes(x, x0, h)
                _require_nodes(y, y0, h)
            pts = np.stack([np.clip(x, xs[0], xs[-1]), np.clip(y, ys[0], ys[-1])], axis=-1)
            return interp(pts.reshape(-1, 2)).reshape(x.shape)

        gx = np.abs(np.diff(samples, axis=0)) / h
        gy = np.abs(np.diff(samples, axis=1)) / h
        L = float(max(gx.max(initial=0.0), gy.max(initial=0.0)))
        kinks = (tuple(xs[1:-1]), tuple(ys[1:-1]))
    else:
        raise BadParams("tabulated samples must be 1D or 2D")
    return Density(dom, func, L, "tabulated",
                   {"h": h, "origin": tuple(origin[:samples.ndim]), "shape": samples.shape},
                   kinks, extension="reject")


def _require_nodes(c, c0, h):
    k = (c - c0) / h
    if not np.allclose(k, np.round(k), atol=1e-9):
        raise OutsideDomain("tabulated density queried between samples with interpolation off")


def load_tabulated(path, interpolate=True):
    """Read the tabulated density text format.

    Line one is ``dim n m h x0 y0`` (``1 n h x0`` in 1D); the samples follow,
    whitespace separated, in row-major order with the x index slowest.
    """
    lines = Path(path).read_text().split("\n", 1)
    head = lines[0].split()
    body = np.array(lines[1].split() if len(lines) > 1 else [], dtype=float)
    dim = int(head[0])
    if dim == 1:
        n, h, x0 = int(head[1]), float(head[2]), float(head[3])
        if body.size != n:
            raise BadParams(f"expected {n} samples, found {body.size}")
        return tabulated(body, h, (x0,), interpolate)
    if dim == 2:
        n, m, h, x0, y0 = int(head[1]), int(head[2]), float(head[3]), float(head[4]), float(head[5])
        if body.size != n * m:
            raise BadParams(f"expected {n * m} samples, found {body.size}")
        return tabulated(body.reshape(n, m), h, (x0, y0), interpolate)
    raise BadParams(f"bad dimension {dim} in {path}")


def save_tabulated(path, samples, h, origin=(0.0, 0.0)):
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        head = f"1 {samples.size} {h!r} {float(origin[0])!r}"
        rows = [" ".join(repr(float(v)) for v in samples)]
    else:
        n, m = samples.shape
        head = f"2 {n} {m} {h!r} {float(origin[0])!r} {float(origin[1])!r}"
        rows = [" ".join(repr(float(v)) for v in row) for row in samples]
    Path(path).write_text("\n".join([head, *rows]) + "\n")


# ---------------------------------------------------------------- integrals

def mass(density, p, region=None, rtol=1e-8):
    """``int_region rho**p`` by dyadic midpoint quadrature split at kinks."""
    region = density.domain if region is None else region
    if p < 0:
        raise BadParams("mass exponent must be nonnegative")
    f = density.power(p)
    if density.dim == 1:
        lo, hi = region.bounds[0]
        return quadrature.integrate_pieces(f, density.axis_breakpoints(0, lo, hi), rtol=rtol)
    (xlo, xhi), (ylo, yhi) = region.bounds
    xb = density.axis_breakpoints(0, xlo, xhi)
    yb = density.axis_breakpoints(1, ylo, yhi)
    total = 0.0
    for xa, xc in zip(xb[:-1], xb[1:]):
        for ya, yc in zip(yb[:-1], yb[1:]):
            total += integrate_box(f, (xa, xc), (ya, yc), rtol=rtol)
    return total


def integrate_box(f, xr, yr, rtol=1e-8, start=32, max_cells=2**24):
    """Tensor midpoint rule on a rectangle with dyadic refinement."""
    def est(k):
        hx, hy = (xr[1] - xr[0]) / k, (yr[1] - yr[0]) / k
        xs = xr[0] + hx * (np.arange(k) + 0.5)
        total = 0.0
        for chunk in np.array_split(np.arange(k), max(1, k * k // 2**20)):
            ys = yr[0] + hy * (chunk + 0.5)
            total += float(np.sum(f(xs[:, None], ys[None, :])))
        return total * hx * hy

    k = start
    prev = est(k)
    while k * k < max_cells:
        k *= 2
        cur = est(k)
        if abs(cur - prev) <= rtol * abs(cur) or cur == prev:
            return cur
        prev = cur
    raise NonIntegrable("2D midpoint refinement did not settle")


def sup_power(density, p, resolution=None):
    """Estimate of ``sup rho**p`` on the domain (``inf`` if rho vanishes and p < 0)."""
    if p == 0:
        return 1.0
    vals = _sample(density, resolution)
    if p < 0 and np.min(vals) <= 0:
        return math.inf
    return float(np.max(_pow(vals, p)))


def _sample(density, resolution=None):
    if density.dim == 1:
        res = resolution or 4096
        lo, hi = density.domain.bounds[0]
        xs = np.union1d(np.linspace(lo, hi, res + 1), density.axis_breakpoints(0))
        return density(xs)
    res = resolution or 512
    (xlo, xhi), (ylo, yhi) = density.domain.bounds
    xs = np.union1d(np.linspace(xlo, xhi, res + 1), density.axis_breakpoints(0))
    ys = np.union1d(np.linspace(ylo, yhi, res + 1), density.axis_breakpoints(1))
    return density(xs[:, None], ys[None, :])


def estimate_lipschitz(density, resolution=None):
    """Largest difference quotient of ``density`` over a regular sample grid.

    Every quotient is a true slope, so the result never exceeds the real
    Lipschitz constant; refine ``resolution`` to tighten it.
    """
    if density.dim == 1:
        res = resolution or 4096
        if res < 2:
            raise BadParams("resolution must be at least 2")
        lo, hi = density.domain.bounds[0]
        xs = np.linspace(lo, hi, res + 1)
        v = density(xs)
        return float(np.max(np.abs(np.diff(v)) / np.diff(xs)))
    res = resolution or 512
    if res < 2:
        raise BadParams("resolution must be at least 2")
    (xlo, xhi), (ylo, yhi) = density.domain.bounds
    xs = np.linspace(xlo, xhi, res + 1)
    ys = np.linspace(ylo, yhi, res + 1)
    hx, hy = xs[1] - xs[0], ys[1] - ys[0]
    v = density(xs[:, None], ys[None, :])
    hd = math.hypot(hx, hy)
    slopes = [
        np.abs(np.diff(v, axis=0)) / hx,
        np.abs(np.diff(v, axis=1)) / hy,
        np.abs(v[1:, 1:] - v[:-1, :-1]) / hd,
        np.abs(v[1:, :-1] - v[:-1, 1:]) / hd,
    ]
    return float(max(s.max() for s in slopes))


def scale(density, ell, a):
    """Rescaled density ``rho_hat`` with ``a * rho_hat(ell * x) = ell * rho(x)``.

    The domain is stretched by ``ell`` and the Lipschitz bound becomes ``L / a``.
    """
    if ell <= 0 or a <= 0:
        raise BadParams("scale factors must be positive")
    base = density
    factor = ell / a

    def func(*coords):
        return factor * base(*(np.asarray(c) / ell for c in coords))

    kinks = tuple(tuple(ell * k for k in ks) for ks in density.kinks)
    return Density(density.domain.scaled(ell), func, density.lipschitz / a,
                   f"scaled({density.name})",
                   {**density.params, "ell": ell, "a": a}, kinks, extension="formula")
