"""Level-set sweep cuts and the partition algorithms built on them.

Cheeger and Buser checks of the results live here too.

The sweep sorts vertices by eigenvector value and scores every level set
``{x > t}`` in one pass: masses by a prefix sum and boundary weights by a
difference array over the sorted positions of each edge's endpoints. The
floating-point screen is followed by an exact :func:`math.fsum` recount of
every candidate within rounding distance of the minimum.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import grid2d
from .densities import ExponentTriple
from .eigensolve import bottom_eigenspace, second_eigenpair
from .errors import BadParams, ConstantVector, DegenerateMass, NoProgress
from .mollify import buser_bound_nd as buser_general

log = logging.getLogger(__name__)

_EPS = np.finfo(float).eps


@dataclass
class SweepResult:
    """Best level set ``{x > threshold}`` of a vertex function."""

    members: np.ndarray
    phi: float
    threshold: float
    mass_a: float
    mass_ac: float
    boundary: float
    candidates: int


def sweep_graph(eu, ev, tau, mass, x, exact=True):
    """Minimum-sparsity level set of ``x`` on a weighted graph.

    Parameters
    ----------
    eu, ev : endpoint index arrays of the edges.
    tau : cut cost per edge.
    mass : vertex weights.
    x : vertex values.

    exact : recount near-minimal candidates with exactly rounded sums. With
        ``False`` the running floating-point sums decide, which is faster
        but may differ from a from-scratch recount in the last bits.

    Only thresholds between distinct values of ``x`` are scored. A level set
    with a massless side scores ``inf``. Ties go to the cut with the larger
    smaller-side mass, then to the lower threshold.
    """
    x = np.asarray(x, dtype=float)
    mass = np.asarray(mass, dtype=float)
    tau = np.asarray(tau, dtype=float)
    N = x.size
    if not np.all(np.isfinite(x)):
        raise BadParams("sweep vector has non-finite entries")
    order = np.argsort(-x, kind="stable")
    xs = x[order]
    # prefix sizes k where {x > xs[k]} = first k sorted vertices
    ks = np.flatnonzero(xs[:-1] > xs[1:]) + 1
    if ks.size == 0:
        raise ConstantVector("the sweep vector is constant")
    pos = np.empty(N, dtype=np.int64)
    pos[order] = np.arange(N)
    lo = np.minimum(pos[eu], pos[ev])
    hi = np.maximum(pos[eu], pos[ev])
    diff = np.zeros(N + 1)
    np.add.at(diff, lo + 1, tau)
    np.add.at(diff, hi + 1, -tau)
    bnd_all = np.cumsum(diff)
    bnd_abs = np.cumsum(np.abs(diff))
    mass_cum = np.concatenate([[0.0], np.cumsum(mass[order])])
    total = mass_cum[-1]

    bnd = np.maximum(bnd_all[ks], 0.0)
    ma = mass_cum[ks]
    small = np.minimum(ma, total - ma)
    # a priori bound on the rounding error of each running sum
    nops = float(N + tau.size)
    bnd_err = 2 * nops * _EPS * bnd_abs[ks]
    small_err = 2 * nops * _EPS * total
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = np.where(small > small_err, bnd / small, np.inf)
        lo_phi = np.where(small > small_err, np.maximum(bnd - bnd_err, 0) / (small + small_err),
                          np.inf)
        hi_phi = np.where(small > small_err, (bnd + bnd_err) / (small - small_err), np.inf)
    if not np.any(np.isfinite(phi)):
        raise DegenerateMass("every level set has a side without mass")
    if not exact:
        c = np.lexsort((xs[ks], -small, phi))[0]
        k = int(ks[c])
        return SweepResult(np.sort(order[:k]), float(phi[c]), float(xs[k]), float(ma[c]),
                           float(total - ma[c]), float(bnd[c]), 1)
    cutoff = np.min(hi_phi)
    cand = np.flatnonzero(lo_phi <= cutoff)

    eu = np.asarray(eu)
    ev = np.asarray(ev)
    best = None
    for c in cand:
        k = int(ks[c])
        in_a = pos < k
        crossing = in_a[eu] != in_a[ev]
        b = math.fsum(tau[crossing])
        ma_exact = math.fsum(mass[order[:k]])
        mac_exact = math.fsum(mass[order[k:]])
        s = min(ma_exact, mac_exact)
        phi_c = b / s if s > 0 else math.inf
        key = (phi_c, -s, xs[k])
        if best is None or key < best[0]:
            best = (key, k, b, ma_exact, mac_exact)
    (phi_best, _, t), k, b, ma_exact, mac_exact = best
    if not math.isfinite(phi_best):
        raise DegenerateMass("every level set has a side without mass")
    return SweepResult(np.sort(order[:k]), phi_best, float(t), ma_exact, mac_exact, b,
                       int(cand.size))


def sweep_cut(grid, x, region=None, exact=True):
    """Best level-set cut of ``x`` on ``grid``, optionally inside ``region``.

    ``x`` is indexed like the region's vertices (all vertices by default).
    Returns a :class:`~densitycut.grid2d.GridCut` with global vertex ids.
    """
    if region is None:
        idx = np.arange(grid.num_vertices)
        keep = np.ones(grid.num_vertices, dtype=bool)
    else:
        keep = grid.as_mask(region)
        idx = np.flatnonzero(keep)
    x = np.asarray(x, dtype=float)
    if x.size != idx.size:
        raise BadParams(f"vector has {x.size} entries for {idx.size} vertices")
    local = np.full(grid.num_vertices, -1)
    local[idx] = np.arange(idx.size)
    sel = keep[grid.eu] & keep[grid.ev]
    res = sweep_graph(local[grid.eu[sel]], local[grid.ev[sel]], grid.tau[sel], grid.mu[idx], x,
                      exact=exact)
    members = idx[res.members]
    in_a = np.zeros(grid.num_vertices, dtype=bool)
    in_a[members] = True
    crossing = np.flatnonzero(sel & (in_a[grid.eu] != in_a[grid.ev]))
    return grid2d.GridCut(members, crossing, res.phi, res.mass_a, res.mass_ac, res.threshold)


# ------------------------------------------------------------ verification

@dataclass
class InequalityCheck:
    cheeger_lhs: float
    cheeger_rhs: float
    cheeger_holds: bool
    buser_lhs: float
    buser_rhs: float
    buser_holds: bool
    constant_variant: str
    buser8_rhs: float = math.nan
    buser8_holds: bool = None


def cheeger_rhs_factor(exponents, sup_mixed=None):
    """Factor ``c`` in ``phi**2 <= c * lambda2``; 4 on the admissible line."""
    if sup_mixed is None:
        return 4.0
    return 4.0 * sup_mixed ** 2


def buser_corollary(phi, L, d, twelve=12.0):
    """``24 d max(L phi, twelve * phi**2)``."""
    return 24.0 * d * max(L * phi, twelve * phi * phi)


def verify_inequalities(phi, lambda2, L, d, exponents=(1, 2, 3), slack=0.05, norms=None):
    """Check ``phi**2 / 4 <= lambda2`` and the Buser upper bound, each with ``slack``.

    By default the Buser side is the corollary form ``24 d max(L phi, 12 phi**2)``;
    the sharper ``8 phi**2`` variant is also evaluated and returned for the
    record. With ``norms = {"g1b": sup rho^(gamma-beta-1), "a1b": sup rho^(alpha+1-beta)}``
    the general-exponent form is used instead, and with ``"mixed"``
    (``sup rho^(beta-(alpha+gamma)/2)``) Cheeger's factor becomes ``4 mixed**2``.
    """
    vals = (phi, lambda2, L)
    if not all(math.isfinite(v) and v >= 0 for v in vals) or d < 1:
        raise BadParams("inputs must be finite and nonnegative")
    norms = norms or {}
    c = cheeger_rhs_factor(exponents, norms.get("mixed"))
    ch_lhs = phi * phi / c
    ch_holds = ch_lhs <= lambda2 * (1 + slack)
    if "g1b" in norms and "a1b" in norms:
        rhs = buser_general(phi, L, d, exponents, norms["g1b"], norms["a1b"])
        variant = "general"
        rhs8, holds8 = math.nan, None
    else:
        rhs = buser_corollary(phi, L, d)
        variant = "24d*max(L*phi,12*phi^2)"
        rhs8 = buser_corollary(phi, L, d, twelve=8.0)
        holds8 = lambda2 <= rhs8 * (1 + slack)
    holds = lambda2 <= rhs * (1 + slack)
    return InequalityCheck(ch_lhs, lambda2, ch_holds, lambda2, rhs, holds, variant, rhs8, holds8)


# ------------------------------------------------------------ algorithms

@dataclass
class CutReport:
    """Everything algorithm 1 computed, plus the inequality verdicts."""

    exponents: ExponentTriple
    h: float
    phi_sweep: float
    lambda2: float
    threshold: float
    cut_cells: np.ndarray = field(repr=False)
    lipschitz_L: float
    d: int
    residual: float
    cheeger_lhs: float
    buser_rhs: float
    cheeger_holds: bool
    buser_holds: bool
    buser8_rhs: float
    buser8_holds: bool
    constant_variant: str
    timings_ms: dict = field(default_factory=dict)
    multiplicity: int = 1

    def recompute(self):
        """``(cheeger_lhs, buser_rhs)`` recomputed from the stored inputs."""
        return self.phi_sweep ** 2 / 4.0, buser_corollary(self.phi_sweep, self.lipschitz_L, self.d)


def _report(ex, h, cut, pair, L, timings, slack=0.05):
    chk = verify_inequalities(cut.phi, pair.lam, L, 2, ex, slack=slack)
    return CutReport(ex, h, cut.phi, pair.lam, cut.threshold, cut.members, L, 2,
                     pair.residual, chk.cheeger_lhs, chk.buser_rhs, chk.cheeger_holds,
                     chk.buser_holds, chk.buser8_rhs, chk.buser8_holds, chk.constant_variant,
                     timings)


def _lipschitz(density):
    return float(density.lipschitz)


def _best_direction(grid, b1, b2, region=None, coarse=90, refine_levels=2):
    """Best sweep over unit vectors ``cos(t) b1 + sin(t) b2`` of a 2D eigenspace.

    Level sets of ``v`` and ``-v`` are complements, so angles in ``[0, pi)``
    cover every direction. A coarse scan is followed by local refinement.
    """
    def score(t):
        v = math.cos(t) * b1 + math.sin(t) * b2
        try:
            return sweep_cut(grid, v, region, exact=False), v
        except ConstantVector:
            return None, v

    best = None
    step = math.pi / coarse
    angles = step * np.arange(coarse)
    for level in range(refine_levels + 1):
        for t in angles:
            cut, v = score(float(t))
            if cut is None:
                continue
            key = (cut.phi, -min(cut.mass_a, cut.mass_ac), float(t))
            if best is None or key < best[0]:
                best = (key, cut, v)
        centre = best[0][2]
        angles = centre + step * np.linspace(-1, 1, 11)[[0, 1, 2, 3, 4, 6, 7, 8, 9, 10]]
        step /= 5
    v = best[2]
    return sweep_cut(grid, v, region), v


def algorithm1(density, exponents, h, tol=1e-8, seed=0, grid=None, method="shift-invert",
               degenerate="search"):
    """Grid, second eigenvector, best level-set cut.

    Returns ``(GridCut, CutReport, Grid2D)``. The pencil eigenvalue is reported
    as is: the ``1/h`` in the conductances already makes it approximate the
    continuum quotient.

    When the smallest nonzero eigenvalue is repeated (symmetric domains), every
    vector of the eigenspace qualifies as "the" second eigenvector. With
    ``degenerate="search"`` the cut is the best sweep over directions in the
    span of the first two eigenvectors; ``"first"`` uses the solver's vector.
    """
    if degenerate not in ("search", "first"):
        raise BadParams("degenerate must be 'search' or 'first'")
    ex = ExponentTriple.of(exponents)
    timings = {}
    t0 = time.perf_counter()
    grid = grid if grid is not None else grid2d.build_grid(density, ex, h)
    t1 = time.perf_counter()
    K, M = grid2d.laplacian_mass(grid)
    if degenerate == "search":
        pairs = bottom_eigenspace(K, M, tol=tol, seed=seed)
    else:
        pairs = [second_eigenpair(K, M, tol=tol, seed=seed, method=method)]
    pair = pairs[0]
    t2 = time.perf_counter()
    if len(pairs) > 1:
        log.info("eigenvalue %.6g has multiplicity %d; searching the eigenspace",
                 pair.lam, len(pairs))
        cut, _ = _best_direction(grid, pairs[0].vector, pairs[1].vector)
    else:
        cut = sweep_cut(grid, pair.vector)
    t3 = time.perf_counter()
    timings.update(grid=1e3 * (t1 - t0), eigen=1e3 * (t2 - t1), sweep=1e3 * (t3 - t2))
    report = _report(ex, grid.h, cut, pair, _lipschitz(density), timings)
    report.multiplicity = len(pairs)
    return cut, report, grid


@dataclass
class Round:
    """One pass of the iterated algorithm."""

    index: int
    phi: float
    lambda2: float
    region_mass: float
    kept_mass: float
    kept_side: str
    component_weights: list


@dataclass
class Algorithm2Result:
    region: np.ndarray
    trail: list
    total_mass: float
    grid: object = field(repr=False)

    @property
    def region_mass(self):
        return math.fsum(self.grid.mu[self.region])


def algorithm2(density, exponents, h, tol=1e-8, max_rounds=50, seed=0, stop_fraction=0.9,
               grid=None):
    """Repeatedly cut the surviving region and keep its heaviest connected piece.

    Each round takes the best level-set cut of the eigenvector on the subgraph
    induced by the current region. The heaviest 4-connected component among
    both sides survives. The loop runs while the region holds at least
    ``stop_fraction`` of the total mass, at most ``max_rounds`` times.
    """
    if max_rounds < 1:
        raise BadParams("max_rounds must be at least 1")
    ex = ExponentTriple.of(exponents)
    grid = grid if grid is not None else grid2d.build_grid(density, ex, h)
    total = math.fsum(grid.mu)
    region = np.ones(grid.num_vertices, dtype=bool)
    region_mass = total
    trail = []
    for r in range(max_rounds):
        if region_mass < stop_fraction * total:
            break
        K, M = grid2d.laplacian_mass(grid, region)
        pair = second_eigenpair(K, M, tol=tol, seed=seed)
        cut = sweep_cut(grid, pair.vector, region)
        a = grid.as_mask(cut.members)
        comps = [(c, "A") for c in grid2d.connected_components(grid, a)]
        comps += [(c, "complement") for c in grid2d.connected_components(grid, region & ~a)]
        comps.sort(key=lambda t: (-t[0].weight, int(t[0].vertices[0])))
        best, side = comps[0]
        new_region = grid.as_mask(best.vertices)
        new_mass = best.weight
        trail.append(Round(r + 1, cut.phi, pair.lam, region_mass, new_mass, side,
                           [c.weight for c, _ in comps]))
        log.info("round %d: phi=%.4g lambda2=%.4g kept %.4g of %.4g", r + 1, cut.phi,
                 pair.lam, new_mass, region_mass)
        if not new_mass < region_mass:
            raise NoProgress(trail, np.flatnonzero(region))
        region, region_mass = new_region, new_mass
    return Algorithm2Result(np.flatnonzero(region), trail, total, grid)


# ------------------------------------------------------------ orientation

@dataclass
class Orientation:
    """How a cut's boundary lines up with the two coordinate axes."""

    across_x0: float
    across_y0: float


def cut_orientation(grid, cut):
    """Fractions of boundary edges crossing the lines ``x = 0`` and ``y = 0``.

    An edge crosses ``x = 0`` when it is horizontal and its midpoint lies within
    one grid step of the line; likewise for ``y = 0``.
    """
    b = cut.boundary_edges
    if b.size == 0:
        return Orientation(math.nan, math.nan)
    xm, ym = grid.edge_midpoints()
    iu, _ = grid.vertex_ij(grid.eu[b])
    iv, _ = grid.vertex_ij(grid.ev[b])
    horiz = iu != iv
    return Orientation(float(np.mean(horiz & (np.abs(xm[b]) < grid.h))),
                       float(np.mean(~horiz & (np.abs(ym[b]) < grid.h))))


@dataclass
class CounterexampleRun:
    n: float
    eps: float
    h: float
    vertices: int
    phi_12: float
    phi_13: float
    lambda_12: float
    lambda_13: float
    orient_12: Orientation
    orient_13: Orientation
    cut_12: object = field(repr=False)
    cut_13: object = field(repr=False)
    grid: object = field(repr=False)

    @property
    def ratio(self):
        """(1,2)-sparsity of the (1,2) cut over that of the (1,3) cut."""
        return self.phi_12 / self.phi_13


def counterexample_orientation(n, eps=None, h=None, columns=31, tol=1e-8, seed=0,
                               parametrization="statement"):
    """Sweep cuts of the (1,2) and (1,3) eigenvectors on the two-scale counterexample.

    Both sweeps score cuts by the (1,2)-sparsity, so the eigenvectors come
    from the exponent triples (1, 2, 2) and (1, 2, 3). By default
    ``eps = 0.01 / n`` and ``h = 2 X / columns``; an odd ``columns`` puts an
    edge midpoint on ``x = 0``.
    """
    from .densities import builtin, counterexample_box

    eps = 0.01 / n if eps is None else eps
    X, _ = counterexample_box(n, parametrization)
    h = 2 * X / columns if h is None else h
    rho = builtin("counterexample2d", {"eps": eps, "n": n, "parametrization": parametrization})
    cut12, rep12, g12 = algorithm1(rho, (1, 2, 2), h, tol=tol, seed=seed)
    cut13, rep13, g13 = algorithm1(rho, (1, 2, 3), h, tol=tol, seed=seed)
    return CounterexampleRun(n, eps, h, g12.num_vertices, cut12.phi, cut13.phi, rep12.lambda2,
                             rep13.lambda2, cut_orientation(g12, cut12),
                             cut_orientation(g13, cut13), cut12, cut13, g13)
