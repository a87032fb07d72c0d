"""Finite-volume style grid discretization of a 2D density.

Vertex ``(i, j)`` sits at ``(x0 + i h, y0 + j h)`` and stands for the
``h x h`` square centred on it, clipped to the domain. The three weights are

* ``mu = |cell| rho**alpha(vertex)``           (mass),
* ``kappa = (|E| / h) rho**gamma(midpoint)``   (conductance),
* ``tau = |E| rho**beta(midpoint)``            (cut cost),

where ``E`` is the shared face of two neighbouring cells and ``midpoint`` is
the point halfway between the two vertices.

>>> from densitycut.densities import builtin
>>> g = build_grid(builtin("uniform", {"dim": 2}), (1, 2, 3), 0.25)
>>> g.shape, float(g.mu.sum())
((5, 5), 1.0)
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .densities import ExponentTriple
from .errors import BadParams, EmptySide, GridTooCoarse, GridTooFine

MAX_VERTICES = 4_000_000


@dataclass(frozen=True, eq=False)
class Grid2D:
    """Vertex masses and 4-neighbour edge weights on a regular grid.

    Vertex ``(i, j)`` has flat index ``i * (m + 1) + j``. Edge arrays are
    aligned: edge ``k`` joins ``eu[k]`` and ``ev[k]`` with ``eu[k] < ev[k]``.
    """

    n: int
    m: int
    h: float
    origin: tuple
    mu: np.ndarray = field(repr=False)
    cell_areas: np.ndarray = field(repr=False)
    eu: np.ndarray = field(repr=False)
    ev: np.ndarray = field(repr=False)
    edge_len: np.ndarray = field(repr=False)
    kappa: np.ndarray = field(repr=False)
    tau: np.ndarray = field(repr=False)
    edge_rho: np.ndarray = field(default=None, repr=False)
    vertex_rho: np.ndarray = field(default=None, repr=False)
    exponents: ExponentTriple = None

    @property
    def shape(self):
        return (self.n + 1, self.m + 1)

    @property
    def num_vertices(self):
        return (self.n + 1) * (self.m + 1)

    @property
    def num_edges(self):
        return self.eu.size

    def vertex_id(self, i, j):
        return np.asarray(i) * (self.m + 1) + np.asarray(j)

    def vertex_ij(self, v):
        return np.divmod(np.asarray(v), self.m + 1)

    def coords(self):
        """Arrays ``(x, y)`` of vertex coordinates, flattened in vertex order."""
        i, j = self.vertex_ij(np.arange(self.num_vertices))
        return self.origin[0] + i * self.h, self.origin[1] + j * self.h

    def edge_midpoints(self):
        x, y = self.coords()
        return 0.5 * (x[self.eu] + x[self.ev]), 0.5 * (y[self.eu] + y[self.ev])

    def as_mask(self, A):
        """Boolean vertex mask from a mask or an index collection."""
        A = np.asarray(A)
        if A.dtype == bool:
            if A.size != self.num_vertices:
                raise BadParams("mask size does not match the grid")
            return A.ravel()
        mask = np.zeros(self.num_vertices, dtype=bool)
        mask[A.astype(int).ravel()] = True
        return mask


@dataclass
class GridCut:
    """A vertex set ``A`` with its sparsity ``sum tau(boundary) / min(mu(A), mu(A^c))``."""

    members: np.ndarray
    boundary_edges: np.ndarray
    phi: float
    mass_a: float
    mass_ac: float
    threshold: float = math.nan

    @property
    def cut_weight(self):
        return self.phi * min(self.mass_a, self.mass_ac)


def _cell_widths(centres, h, lo, hi):
    left = np.maximum(centres - h / 2, lo)
    right = np.minimum(centres + h / 2, hi)
    return np.clip(right - left, 0.0, None)


def build_grid(density, exponents, h, max_vertices=MAX_VERTICES, min_cells=4):
    """Discretize a 2D density on a grid of spacing ``h``.

    ``n = ceil(l / h)`` cells across and ``m = ceil(w / h)`` up, giving
    ``(n + 1)(m + 1)`` vertices. Cells and faces are clipped to the domain;
    a vertex whose clipped cell is empty gets zero mass and zero-length faces.
    Density samples at points beyond the domain use the nearest domain point.
    ``h`` may be at most ``1 / min_cells`` of the shorter side.
    """
    if density.dim != 2:
        raise BadParams("build_grid needs a 2D density")
    ex = ExponentTriple.of(exponents)
    (x0, x1), (y0, y1) = density.domain.bounds
    l, w = x1 - x0, y1 - y0
    if not h > 0:
        raise BadParams("h must be positive")
    if h > min(l, w) / min_cells:
        raise GridTooCoarse(f"h = {h} exceeds 1/{min_cells} of the shorter side {min(l, w)}")
    # tolerate l/h landing a rounding error above an integer
    n = math.ceil(l / h - 1e-9)
    m = math.ceil(w / h - 1e-9)
    if (n + 1) * (m + 1) > max_vertices:
        raise GridTooFine(f"{(n + 1) * (m + 1)} vertices exceed the cap {max_vertices}")

    xs = x0 + h * np.arange(n + 1)
    ys = y0 + h * np.arange(m + 1)
    wx = _cell_widths(xs, h, x0, x1)
    wy = _cell_widths(ys, h, y0, y1)
    xc = np.clip(xs, x0, x1)
    yc = np.clip(ys, y0, y1)

    rho_v = density(xc[:, None], yc[None, :])
    areas = np.outer(wx, wy)
    mu = areas * _pow(rho_v, ex.alpha)

    vid = np.arange((n + 1) * (m + 1)).reshape(n + 1, m + 1)
    # faces between horizontal neighbours (i, j) - (i + 1, j)
    xf = 0.5 * (xs[:-1] + xs[1:])
    h_len = np.where(((xf > x0) & (xf < x1))[:, None], wy[None, :], 0.0)
    h_rho = density(np.clip(xf, x0, x1)[:, None], yc[None, :])
    # faces between vertical neighbours (i, j) - (i, j + 1)
    yf = 0.5 * (ys[:-1] + ys[1:])
    v_len = np.where(((yf > y0) & (yf < y1))[None, :], wx[:, None], 0.0)
    v_rho = density(xc[:, None], np.clip(yf, y0, y1)[None, :])

    eu = np.concatenate([vid[:-1, :].ravel(), vid[:, :-1].ravel()])
    ev = np.concatenate([vid[1:, :].ravel(), vid[:, 1:].ravel()])
    elen = np.concatenate([h_len.ravel(), v_len.ravel()])
    erho = np.concatenate([h_rho.ravel(), v_rho.ravel()])
    kappa = elen / h * _pow(erho, ex.gamma)
    tau = elen * _pow(erho, ex.beta)
    for arr in (mu, areas, elen, kappa, tau, erho):
        arr.setflags(write=False)
    return Grid2D(n, m, float(h), (float(x0), float(y0)), mu.ravel(), areas.ravel(),
                  eu, ev, elen, kappa, tau, erho, rho_v.ravel(), ex)


def _pow(values, p):
    if p == 0:
        return np.ones_like(values)
    return np.asarray(values, dtype=float) ** p


def laplacian_mass(grid, region=None):
    """Weighted Laplacian ``D - W`` of the conductances and the mass diagonal.

    With ``region`` (a vertex mask or index set) the operators belong to the
    induced subgraph, indexed by ``np.flatnonzero(region)``.
    """
    if region is None:
        keep = np.ones(grid.num_vertices, dtype=bool)
    else:
        keep = grid.as_mask(region)
    idx = np.flatnonzero(keep)
    local = np.full(grid.num_vertices, -1)
    local[idx] = np.arange(idx.size)
    sel = keep[grid.eu] & keep[grid.ev] & (grid.kappa > 0)
    u, v, k = local[grid.eu[sel]], local[grid.ev[sel]], grid.kappa[sel]
    N = idx.size
    W = sp.coo_matrix((np.concatenate([k, k]), (np.concatenate([u, v]), np.concatenate([v, u]))),
                      shape=(N, N)).tocsr()
    deg = np.asarray(W.sum(axis=1)).ravel()
    L = (sp.diags(deg) - W).tocsr()
    return L, sp.diags(grid.mu[idx])


def cut_sparsity(grid, A, region=None):
    """Sparsity of the vertex set ``A`` within ``region`` (default: the whole grid).

    Sums use :func:`math.fsum`, so the value does not depend on vertex order
    and ``cut_sparsity(A) == cut_sparsity(region - A)`` exactly.
    """
    keep = np.ones(grid.num_vertices, dtype=bool) if region is None else grid.as_mask(region)
    a = grid.as_mask(A) & keep
    ac = keep & ~a
    if not a.any() or not ac.any():
        raise EmptySide("a cut needs vertices on both sides")
    both = keep[grid.eu] & keep[grid.ev]
    crossing = np.flatnonzero(both & (a[grid.eu] != a[grid.ev]))
    ma = math.fsum(grid.mu[a])
    mac = math.fsum(grid.mu[ac])
    small = min(ma, mac)
    top = math.fsum(grid.tau[crossing])
    phi = top / small if small > 0 else math.inf
    return GridCut(np.flatnonzero(a), crossing, phi, ma, mac)


@dataclass
class Component:
    vertices: np.ndarray
    weight: float


def connected_components(grid, A):
    """4-neighbour connected components of ``A``, heaviest first.

    Every grid neighbour pair counts as adjacent, whatever its weights.
    Ties in weight keep the order of the smallest vertex index.
    """
    a = grid.as_mask(A)
    idx = np.flatnonzero(a)
    if idx.size == 0:
        return []
    local = np.full(grid.num_vertices, -1)
    local[idx] = np.arange(idx.size)
    sel = a[grid.eu] & a[grid.ev]
    u, v = local[grid.eu[sel]], local[grid.ev[sel]]
    G = sp.coo_matrix((np.ones(u.size), (u, v)), shape=(idx.size, idx.size))
    ncomp, labels = csgraph.connected_components(G, directed=False)
    comps = []
    for c in range(ncomp):
        verts = idx[labels == c]
        comps.append(Component(verts, math.fsum(grid.mu[verts])))
    comps.sort(key=lambda c: (-c.weight, int(c.vertices[0])))
    return comps


# ---------------------------------------------------------------- text dump

def dump_grid(grid, path):
    """Write the text dump.

    The header ``n m h`` and an ``# origin`` line precede the mu table; edge
    rows ``i j i' j' kappa tau`` follow.
    """
    with open(path, "w") as fh:
        fh.write(f"{grid.n} {grid.m} {grid.h!r}\n")
        fh.write(f"# origin {grid.origin[0]!r} {grid.origin[1]!r}\n")
        for row in grid.mu.reshape(grid.shape):
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")
        iu, ju = grid.vertex_ij(grid.eu)
        iv, jv = grid.vertex_ij(grid.ev)
        for k in range(grid.num_edges):
            fh.write(f"{iu[k]} {ju[k]} {iv[k]} {jv[k]} {float(grid.kappa[k])!r} "
                     f"{float(grid.tau[k])!r}\n")


def load_grid(path):
    """Read a dump back. Edge lengths and density samples are not stored and come back as NaN."""
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    n, m, h = lines[0].split()
    n, m, h = int(n), int(m), float(h)
    pos = 1
    origin = (0.0, 0.0)
    if lines[1].startswith("#"):
        parts = lines[1].split()
        origin = (float(parts[2]), float(parts[3]))
        pos = 2
    mu = np.array([[float(t) for t in lines[pos + i].split()] for i in range(n + 1)])
    if mu.shape != (n + 1, m + 1):
        raise BadParams("mu table has the wrong shape")
    rows = [ln.split() for ln in lines[pos + n + 1:]]
    arr = np.array(rows, dtype=float).reshape(-1, 6)
    eu = (arr[:, 0] * (m + 1) + arr[:, 1]).astype(int)
    ev = (arr[:, 2] * (m + 1) + arr[:, 3]).astype(int)
    nan = np.full(eu.size, np.nan)
    return Grid2D(n, m, h, origin, mu.ravel(), np.full(mu.size, np.nan), eu, ev, nan,
                  arr[:, 4], arr[:, 5])
