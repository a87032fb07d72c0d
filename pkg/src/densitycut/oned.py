"""Cuts and eigenvalues of one-dimensional densities.

In 1D a cut is a single point ``x``; its sparsity is ``rho(x)**beta`` over
the smaller of the two ``rho**alpha`` masses. Eigenvalues come from a
piecewise-linear finite element discretization of

    -(rho**gamma u')' = lambda rho**alpha u

with natural boundary conditions.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import minimize_scalar

from . import quadrature
from .densities import ExponentTriple, mass, sup_power
from .eigensolve import second_eigenpair
from .errors import BadParams, DegenerateMass, WitnessDegenerate


@dataclass
class Sparsity1DResult:
    xhat: float
    phi: float
    left_mass: float
    right_mass: float


@dataclass
class Eig1DResult:
    lambda2: float
    eigvec: np.ndarray
    mesh_n: int
    residual: float
    nodes: np.ndarray = None


def _require_1d(density):
    if density.dim != 1:
        raise BadParams(f"{density.name} is {density.dim}D; a 1D density is required")


def sparsity_at(density, exponents, x, rtol=1e-10):
    """Sparsity of the cut at ``x`` with masses from adaptive quadrature."""
    _require_1d(density)
    ex = ExponentTriple.of(exponents)
    a, b = density.domain.bounds[0]
    f = density.power(ex.alpha)
    left = quadrature.integrate_pieces(f, density.axis_breakpoints(0, a, x), rtol=rtol)
    right = quadrature.integrate_pieces(f, density.axis_breakpoints(0, x, b), rtol=rtol)
    small = min(left, right)
    top = float(density.power(ex.beta)(np.array([x]))[0])
    phi = top / small if small > 0 else math.inf
    return Sparsity1DResult(float(x), phi, left, right)


def sweep_sparsity_1d(density, exponents, n_candidates=4096):
    """Minimum sparsity over equispaced interior points and the density's kinks.

    Masses on either side of every candidate come from Gauss-Legendre panels
    between consecutive candidates, so kinks never sit inside a panel. The
    best candidate is then polished by a bounded scalar search between its
    neighbours, with masses recomputed adaptively. Ties go to the more
    balanced cut, then to the smaller ``x``.
    """
    _require_1d(density)
    if n_candidates < 3:
        raise BadParams("need at least 3 candidates")
    ex = ExponentTriple.of(exponents)
    a, b = density.domain.bounds[0]
    grid = a + (b - a) * np.arange(1, n_candidates + 1) / (n_candidates + 1)
    kinks = density.axis_breakpoints(0)[1:-1]
    cand = np.union1d(grid, kinks)
    edges = np.concatenate([[a], cand, [b]])
    cum = quadrature.cumulative_gauss(density.power(ex.alpha), edges)
    total = cum[-1]
    left = cum[1:-1]
    right = total - left
    small = np.minimum(left, right)
    top = density.power(ex.beta)(cand)
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = np.where(small > 0, top / small, np.inf)
    if not np.any(np.isfinite(phi)):
        raise DegenerateMass("every candidate cut leaves one side without mass")
    best = np.min(phi)
    ties = np.flatnonzero(phi <= best * (1 + 1e-12))
    k = ties[np.lexsort((cand[ties], -small[ties]))[0]]
    result = sparsity_at(density, ex, float(cand[k]))
    # polish between the neighbouring candidates; kinks stay put unless beaten
    lo, hi = edges[k], edges[k + 2]
    opt = minimize_scalar(lambda t: sparsity_at(density, ex, t, rtol=1e-9).phi,
                          bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12 * (b - a)})
    if opt.success and lo < opt.x < hi:
        polished = sparsity_at(density, ex, float(opt.x))
        if polished.phi < result.phi * (1 - 1e-12):
            result = polished
    return result


def fem_matrices(density, exponents, mesh_n):
    """Stiffness ``K`` (midpoint rho**gamma) and lumped mass diagonal on a uniform mesh."""
    _require_1d(density)
    if mesh_n < 8:
        raise BadParams("mesh_n must be at least 8")
    ex = ExponentTriple.of(exponents)
    a, b = density.domain.bounds[0]
    x = np.linspace(a, b, mesh_n + 1)
    h = (b - a) / mesh_n
    mid = 0.5 * (x[:-1] + x[1:])
    k = density.power(ex.gamma)(mid) / h
    main = np.zeros(mesh_n + 1)
    main[:-1] += k
    main[1:] += k
    K = sp.diags([main, -k, -k], [0, 1, -1], format="csr")
    cell = np.full(mesh_n + 1, h)
    cell[[0, -1]] = h / 2
    m = density.power(ex.alpha)(x) * cell
    return K, m, x


def lambda2_1d_fem(density, exponents, mesh_n=2048, tol=1e-10, seed=0):
    """Smallest nonzero generalized eigenvalue of the P1 discretization."""
    K, m, x = fem_matrices(density, exponents, mesh_n)
    pair = second_eigenpair(K, m, tol=tol, seed=seed)
    return Eig1DResult(pair.lam, pair.vector, mesh_n, pair.residual, x)


def rayleigh_1d(density, exponents, u, du, rtol=1e-10):
    """``int rho**gamma du**2 / int rho**alpha u**2`` over the whole domain."""
    _require_1d(density)
    ex = ExponentTriple.of(exponents)
    pts = density.axis_breakpoints(0)
    g, w = density.power(ex.gamma), density.power(ex.alpha)
    num = quadrature.integrate_pieces(lambda t: g(t) * du(t) ** 2, pts, rtol=rtol)
    den = quadrature.integrate_pieces(lambda t: w(t) * u(t) ** 2, pts, rtol=rtol)
    return num / den


# ------------------------------------------------------------ Buser witness

def _panel_integral(f, lo, hi, kinks, panels=64):
    if hi <= lo:
        return 0.0
    edges = np.union1d(np.linspace(lo, hi, panels + 1), [k for k in kinks if lo < k < hi])
    return float(quadrature.cumulative_gauss(f, edges)[-1])


def buser_theta_1d(phi, L, exponents, sup_a1b):
    """Mollification parameter that balances the two terms of the 1D Buser bound.

    ``sup_a1b`` is ``sup rho**(alpha + 1 - beta)``.
    """
    ex = ExponentTriple.of(exponents)
    first = 1.0 / (4.0 * phi * sup_a1b) if phi > 0 else math.inf
    second = math.log(1.5) / (ex.alpha * L) if ex.alpha * L > 0 else math.inf
    theta = min(first, second)
    if not math.isfinite(theta):
        raise WitnessDegenerate("theta is unbounded: zero sparsity and zero Lipschitz constant")
    return theta


def buser_bound_1d(phi, L, exponents, sup_g1b, sup_a1b):
    """Right-hand side ``8 (3/2)^(gamma/alpha) |rho^(gamma-1-beta)| max(4 |rho^(alpha+1-beta)| phi^2, alpha L phi / ln 1.5)``."""
    ex = ExponentTriple.of(exponents)
    return (8.0 * 1.5 ** (ex.gamma / ex.alpha) * sup_g1b
            * max(4.0 * sup_a1b * phi ** 2, ex.alpha / math.log(1.5) * L * phi))


def buser_witness_1d(density, exponents, xhat, theta, tol=1e-12):
    """Rayleigh quotient of the smoothed two-level test function at ``xhat``.

    The test function is ``|B|`` left of the transition and ``-|A|`` right of
    it (``A``/``B`` the left/right ``rho**alpha`` masses), linear with slope
    ``-|Omega| / delta`` across a window of width ``delta = theta * rho(xhat)``.
    The window is slid by bisection until the function has zero weighted mean.
    """
    _require_1d(density)
    ex = ExponentTriple.of(exponents)
    if theta <= 0:
        raise BadParams("theta must be positive")
    a, b = density.domain.bounds[0]
    if not a < xhat < b:
        raise BadParams("xhat must be interior")
    delta = theta * float(density(np.array([xhat]))[0])
    if delta <= 0:
        raise WitnessDegenerate("rho(xhat) = 0 gives an empty transition window")
    lo, hi = xhat - delta, xhat + delta
    if lo < a or hi > b:
        raise WitnessDegenerate(f"transition window [{lo}, {hi}] leaves the domain")

    wa = density.power(ex.alpha)
    wg = density.power(ex.gamma)
    kinks = density.axis_breakpoints(0)[1:-1]
    rtol = 1e-11
    outer_left = quadrature.integrate_pieces(wa, density.axis_breakpoints(0, a, lo), rtol=rtol)
    outer_right = quadrature.integrate_pieces(wa, density.axis_breakpoints(0, hi, b), rtol=rtol)
    A = outer_left + _panel_integral(wa, lo, xhat, kinks)
    B = outer_right + _panel_integral(wa, xhat, hi, kinks)
    total = A + B
    slope = total / delta

    def ell(t, x1):
        return B - slope * (t - x1)

    def weighted_mean(x1):
        x2 = x1 + delta
        left = outer_left + _panel_integral(wa, lo, x1, kinks)
        right = outer_right + _panel_integral(wa, x2, hi, kinks)
        mid = _panel_integral(lambda t: wa(t) * ell(t, x1), x1, x2, kinks)
        return B * left - A * right + mid

    # weighted_mean is increasing in x1: negative at lo, positive at xhat.
    x1_lo, x1_hi = lo, xhat
    while x1_hi - x1_lo > tol * max(delta, 1e-300) and x1_hi - x1_lo > 0:
        mid_pt = 0.5 * (x1_lo + x1_hi)
        if mid_pt in (x1_lo, x1_hi):
            break
        if weighted_mean(mid_pt) > 0:
            x1_hi = mid_pt
        else:
            x1_lo = mid_pt
    x1 = 0.5 * (x1_lo + x1_hi)
    x2 = x1 + delta

    num = slope ** 2 * _panel_integral(wg, x1, x2, kinks)
    den = (B ** 2 * (outer_left + _panel_integral(wa, lo, x1, kinks))
           + A ** 2 * (outer_right + _panel_integral(wa, x2, hi, kinks))
           + _panel_integral(lambda t: wa(t) * ell(t, x1) ** 2, x1, x2, kinks))
    return num / den


# ------------------------------------------------------- Hardy-Muckenhoupt

@dataclass
class MuckenhouptBracket:
    """Two-sided estimate ``1/(4B) <= lambda_2 <= 4/B``; unpacks as ``(lower, upper)``."""

    lower: float
    upper: float
    constant: float
    median: float
    divergent: bool = False

    def __iter__(self):
        yield self.lower
        yield self.upper


def _muckenhoupt_constant(density, ex, resolution):
    a, b = density.domain.bounds[0]
    edges = np.union1d(np.linspace(a, b, resolution + 1), density.axis_breakpoints(0))
    cm = quadrature.cumulative_gauss(density.power(ex.alpha), edges)
    median = float(np.interp(0.5 * cm[-1], cm, edges))
    edges = np.union1d(edges, [median])
    cm = quadrature.cumulative_gauss(density.power(ex.alpha), edges)
    with np.errstate(over="ignore", invalid="ignore"):
        ci = quadrature.cumulative_gauss(density.power(-ex.gamma), edges)
    k = int(np.searchsorted(edges, median))
    # right: tail mass beyond r times inverse weight from the median to r
    right = (cm[-1] - cm[k:]) * (ci[k:] - ci[k])
    left = cm[:k + 1] * (ci[k] - ci[:k + 1])
    vals = np.concatenate([right, left])
    vals = vals[np.isfinite(vals) | np.isinf(vals)]
    return float(np.max(vals)), median


def muckenhoupt_bound(density, exponents, resolution=2**14):
    """Bracket for ``lambda_2`` from the weighted Hardy constant about the median.

    ``B`` is the larger of the two one-sided constants
    ``sup_r (int_r^b rho^alpha)(int_m^r rho^-gamma)`` with ``m`` the
    ``rho^alpha``-median. When ``B`` keeps growing under refinement the
    inverse weight is not integrable; a warning is issued and the lower
    bound is reported as 0.
    """
    _require_1d(density)
    ex = ExponentTriple.of(exponents)
    B1, med = _muckenhoupt_constant(density, ex, resolution)
    B2, _ = _muckenhoupt_constant(density, ex, 2 * resolution)
    divergent = (not math.isfinite(B2)) or B2 > 1.1 * B1
    if divergent:
        warnings.warn(f"inverse weight rho^-{ex.gamma} is not integrable for "
                      f"{density.name}; Hardy constant diverges", RuntimeWarning, stacklevel=2)
        upper = 4.0 / B2 if math.isfinite(B2) and B2 > 0 else 0.0
        return MuckenhouptBracket(0.0, upper, B2, med, True)
    return MuckenhouptBracket(1.0 / (4.0 * B2), 4.0 / B2, B2, med)


def hardy_norms(density, exponents):
    """The sup-norm factors used by the 1D Cheeger and Buser bounds."""
    ex = ExponentTriple.of(exponents)
    return {
        "cheeger": sup_power(density, ex.beta - 0.5 * (ex.alpha + ex.gamma)),
        "g1b": sup_power(density, ex.gamma - 1 - ex.beta),
        "a1b": sup_power(density, ex.alpha + 1 - ex.beta),
    }


def total_mass(density, exponents):
    return mass(density, ExponentTriple.of(exponents).alpha)


@dataclass
class Analysis1D:
    """Results of the 1D pipeline for one density."""

    phi: float
    xhat: float
    lambda2: float
    residual: float
    lipschitz: float
    theta: float
    witness: float
    buser_bound: float
    norms: dict


def analyze_1d(density, exponents, mesh_n=2048, n_candidates=4096, tol=1e-10, seed=0):
    """Run the 1D pipeline: best cut and FEM eigenvalue, plus the witness at the balancing theta.

    ``witness`` is NaN when the transition window does not fit in the domain.
    """
    ex = ExponentTriple.of(exponents)
    cut = sweep_sparsity_1d(density, ex, n_candidates)
    eig = lambda2_1d_fem(density, ex, mesh_n, tol=tol, seed=seed)
    norms = hardy_norms(density, ex)
    L = float(density.lipschitz)
    try:
        theta = buser_theta_1d(cut.phi, L, ex, norms["a1b"])
        witness = buser_witness_1d(density, ex, cut.xhat, theta)
    except WitnessDegenerate:
        theta, witness = math.nan, math.nan
    bound = buser_bound_1d(cut.phi, L, ex, norms["g1b"], norms["a1b"])
    return Analysis1D(cut.phi, cut.xhat, eig.lambda2, eig.residual, L, theta, witness, bound,
                      norms)


@dataclass
class ScalingCheck:
    phi: float
    phi_scaled: float
    phi_factor: float
    rayleigh: float
    rayleigh_scaled: float
    rayleigh_factor: float

    @property
    def phi_error(self):
        return abs(self.phi_scaled - self.phi_factor * self.phi) / abs(self.phi_factor * self.phi)

    @property
    def rayleigh_error(self):
        pred = self.rayleigh_factor * self.rayleigh
        return abs(self.rayleigh_scaled - pred) / abs(pred)


def scaling_check_1d(density, exponents, ell, a, x, u, du):
    """Compare sparsity and Rayleigh quotient before and after rescaling.

    With ``a rho_hat(ell x) = ell rho(x)``, ``A_hat = ell A`` and
    ``u_hat(ell x) = u(x)``, the predicted factors are
    ``phi_hat / phi = (ell / a)**(beta - alpha) / ell`` and
    ``R_hat / R = (ell / a)**(gamma - alpha) / ell**2``; on the admissible
    line they reduce to ``1 / a`` and ``1 / a**2``.
    """
    from .densities import scale

    ex = ExponentTriple.of(exponents)
    hat = scale(density, ell, a)
    phi = sparsity_at(density, ex, x, rtol=1e-12).phi
    phi_hat = sparsity_at(hat, ex, ell * x, rtol=1e-12).phi
    R = rayleigh_1d(density, ex, u, du, rtol=1e-12)
    R_hat = rayleigh_1d(hat, ex, lambda y: u(y / ell), lambda y: du(y / ell) / ell, rtol=1e-12)
    r = ell / a
    return ScalingCheck(phi, phi_hat, r ** (ex.beta - ex.alpha) / ell, R, R_hat,
                        r ** (ex.gamma - ex.alpha) / ell ** 2)
