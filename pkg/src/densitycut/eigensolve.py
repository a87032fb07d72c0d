"""Second eigenpair of a Laplacian-like pencil ``K v = lambda M v``.

``K`` is symmetric positive semidefinite with ``K @ 1 = 0`` and ``M`` is
diagonal and nonnegative. The constant vector spans the zero eigenspace of a
connected pencil; it is removed by projecting every iterate onto the
``M``-orthogonal complement of the constants, which is invariant under the
shift-invert operator.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh, lobpcg, splu

from .errors import SingularPencil, SolverNoConverge

log = logging.getLogger(__name__)


@dataclass
class EigenPair:
    lam: float
    vector: np.ndarray
    residual: float
    iterations: int
    method: str = "shift-invert"


def _diag(M):
    if sp.issparse(M):
        d = np.asarray(M.diagonal(), dtype=float)
    else:
        M = np.asarray(M, dtype=float)
        d = M.copy() if M.ndim == 1 else np.diag(M).copy()
    if np.any(d < 0):
        raise ValueError("mass matrix must be nonnegative")
    return d


def residual_norm(K, m, lam, v):
    Mv = m * v
    den = np.linalg.norm(Mv)
    return float(np.linalg.norm(K @ v - lam * Mv) / den) if den > 0 else np.inf


def _weighted_median(v, w):
    order = np.argsort(v, kind="stable")
    cw = np.cumsum(w[order])
    k = int(np.searchsorted(cw, 0.5 * cw[-1]))
    return v[order[min(k, v.size - 1)]]


def _finish(K, m, v, iterations, method):
    v = v - np.dot(m, v) / m.sum()
    v = v / np.sqrt(np.dot(m * v, v))
    med = _weighted_median(v, m)
    if med > 0 or (med == 0 and v[np.flatnonzero(v)[0]] > 0):
        v = -v
    lam = float(v @ (K @ v)) / float(np.dot(m * v, v))
    lam = max(lam, 0.0)
    return EigenPair(lam, v, residual_norm(K, m, lam, v), iterations, method)


def second_eigenpair(K, M, tol=1e-10, max_iter=5000, seed=0, method="shift-invert"):
    """Smallest eigenpair of ``(K, M)`` orthogonal to the constants.

    Parameters
    ----------
    K : sparse or dense symmetric PSD matrix with zero row sums.
    M : diagonal mass, given as a vector, a dense diagonal matrix or sparse.
    tol : residual target. The solve is accepted when
        ``||K v - lam M v|| / ||M v||`` is below ``tol`` times the pencil
        scale ``max(1, trace(K) / trace(M))``; the raw residual is reported.
    method : ``"shift-invert"`` (ARPACK on the deflated operator) or
        ``"lobpcg"`` (Jacobi-preconditioned block iteration with the
        constants as a hard constraint; falls back to shift-invert if it
        stalls).

    Rows with ``M_ii = 0`` are kept. Vertices with neither mass nor stiffness
    are inert; they are solved without and given the value 0. A connected
    component carrying no mass makes the pencil singular. When the graph has
    several massive components the returned eigenvalue is 0.

    The vector is normalized to ``v^T M v = 1`` and signed so that its
    mass-weighted median is not positive.
    """
    K = sp.csr_matrix(K, dtype=float)
    m_full = _diag(M)
    n_full = K.shape[0]
    if K.shape != (n_full, n_full) or m_full.size != n_full:
        raise ValueError("K and M sizes disagree")
    if np.count_nonzero(m_full > 0) < 2:
        raise SingularPencil("the mass matrix needs at least two positive entries")

    kdiag = K.diagonal()
    live = (m_full > 0) | (kdiag > 0)
    idx = np.flatnonzero(live)
    K = K[idx][:, idx].tocsr()
    m = m_full[idx]
    n = idx.size

    ncomp, labels = csgraph.connected_components(K, directed=False)
    comp_mass = np.bincount(labels, weights=m, minlength=ncomp)
    if np.any(comp_mass <= 0):
        raise SingularPencil("a connected component of the stiffness graph has no mass")

    def embed(pair):
        full = np.zeros(n_full)
        full[idx] = pair.vector
        pair.vector = full
        return pair

    if ncomp > 1:
        # Disconnected: lambda_2 = 0 with a two-valued component indicator.
        heavy = int(np.argmax(comp_mass))
        v = np.where(labels == heavy, 1.0, 0.0)
        return embed(_finish(K, m, v, 0, "components"))

    if n <= 2:
        return embed(_dense_small(K, m))

    if method == "lobpcg":
        try:
            return embed(_lobpcg(K, m, tol, max_iter, seed))
        except SolverNoConverge as exc:
            log.info("lobpcg stalled (%s); retrying with shift-invert", exc)
    return embed(_shift_invert(K, m, tol, max_iter, seed))


def bottom_eigenspace(K, M, k=3, rel_gap=1e-6, tol=1e-10, max_iter=5000, seed=0):
    """Eigenpairs sharing the smallest nonzero eigenvalue, up to ``rel_gap``.

    Computes the ``k`` lowest nonzero pairs of a connected pencil and keeps
    those within ``rel_gap`` (relative) of the first. The vectors are made
    ``M``-orthonormal. Pencils that :func:`second_eigenpair` treats specially
    (tiny, disconnected, with inert vertices) return its single pair.
    """
    K = sp.csr_matrix(K, dtype=float)
    m = _diag(M)
    simple = (np.all(m > 0) and K.shape[0] > k + 2
              and csgraph.connected_components(K, directed=False)[0] == 1)
    if not simple:
        return [second_eigenpair(K, M, tol=tol, max_iter=max_iter, seed=seed)]
    pairs = _shift_invert(K, m, tol, max_iter, seed, k=k)
    lam0 = pairs[0].lam
    cluster = [p for p in pairs if p.lam <= lam0 * (1 + rel_gap)]
    if len(cluster) == 1:
        return [pairs[0]]
    # M-orthonormalize the cluster (Gram-Schmidt in the M inner product)
    basis = []
    for p in cluster:
        v = p.vector.copy()
        for b in basis:
            v -= np.dot(m * b, v) * b
        v /= np.sqrt(np.dot(m * v, v))
        basis.append(v)
    return [_finish(K, m, v, p.iterations, p.method) for v, p in zip(basis, cluster)]


def _dense_small(K, m):
    from scipy.linalg import eigh

    Kd = K.toarray()
    pos = m > 0
    if not np.all(pos):
        raise SingularPencil("tiny pencils need positive mass everywhere")
    w, V = eigh(Kd, np.diag(m))
    return _finish(K, m, V[:, 1], 1, "dense")


def _scale(K, m):
    return max(1.0, float(K.diagonal().sum() / m.sum()))


def _projector(m):
    total = m.sum()
    return lambda y: y - np.dot(m, y) / total


def _shift_invert(K, m, tol, max_iter, seed, k=1):
    n = K.shape[0]
    project = _projector(m)
    scale_ = K.diagonal().sum() / m.sum()
    shift = 1e-9 * scale_ if scale_ > 0 else 1e-12
    rng = np.random.default_rng(seed)
    k = min(k, n - 2) if n > 3 else 1

    floor = 1e-13 * max(scale_, 1e-300)
    pairs = None
    for attempt in range(3):
        try:
            lu_new = splu(sp.csc_matrix(K + shift * sp.diags(m)))
        except RuntimeError:
            # shift lost below roundoff; keep the previous solve
            if pairs is None:
                raise SingularPencil("shifted pencil is numerically singular") from None
            break
        lu = lu_new

        OPinv = LinearOperator((n, n), matvec=lambda x, lu=lu: project(lu.solve(np.ravel(x))),
                               dtype=float)
        v0 = project(lu.solve(m * rng.standard_normal(n)))
        try:
            w, V = eigsh(K, k=k, M=sp.diags(m), sigma=-shift, which="LM", OPinv=OPinv,
                         v0=v0, tol=min(tol, 1e-6) * 1e-2, maxiter=max_iter)
        except ArpackNoConvergence as exc:
            if exc.eigenvalues.size:
                pair = _finish(K, m, exc.eigenvectors[:, 0], max_iter, "shift-invert")
                raise SolverNoConverge(max_iter, pair.residual) from None
            raise SolverNoConverge(max_iter, np.inf) from None
        order = np.argsort(w)
        pairs = [_finish(K, m, project(V[:, c]), 1, "shift-invert") for c in order]
        if pairs[0].lam < 100 * shift and attempt < 2 and shift > floor:
            # shift too coarse for this eigenvalue; shrink and redo
            shift = max(shift * 1e-4, floor)
            continue
        break
    target = tol * _scale(K, m)
    if k == 1:
        pairs[0] = _refine(K, m, pairs[0], lu, project, target)
    for pair in pairs:
        if pair.residual > target:
            raise SolverNoConverge(pair.iterations, pair.residual)
    return pairs[0] if k == 1 else pairs


def _refine(K, m, pair, lu, project, tol, steps=3):
    """A few steps of inverse iteration to polish the residual."""
    it = pair.iterations
    for _ in range(steps):
        if pair.residual <= tol * 1e-2:
            break
        v = project(lu.solve(m * pair.vector))
        cand = _finish(K, m, v, it + 1, pair.method)
        if cand.residual >= pair.residual:
            break
        pair, it = cand, it + 1
    return pair


def _lobpcg(K, m, tol, max_iter, seed):
    n = K.shape[0]
    if np.any(m <= 0):
        raise SolverNoConverge(0, np.inf, "lobpcg needs positive mass everywhere")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, 2))
    Y = np.ones((n, 1))
    d = K.diagonal() + m * (K.diagonal().sum() / m.sum()) * 1e-6
    precond = sp.diags(1.0 / d)
    w, V, hist = lobpcg(K, X, B=sp.diags(m), M=precond, Y=Y, tol=tol * 1e-2,
                        maxiter=max_iter, largest=False, retResidualNormsHistory=True)
    k = int(np.argmin(w))
    pair = _finish(K, m, V[:, k], len(hist), "lobpcg")
    if pair.residual > tol * _scale(K, m):
        raise SolverNoConverge(len(hist), pair.residual)
    return pair


def dense_second_eigenvalue(K, M):
    """Reference value from a dense solve of ``M^{-1/2} K M^{-1/2}`` (M > 0)."""
    Kd = K.toarray() if sp.issparse(K) else np.asarray(K, dtype=float)
    m = _diag(M)
    s = 1.0 / np.sqrt(m)
    w = np.linalg.eigvalsh(s[:, None] * Kd * s[None, :])
    return float(np.sort(w)[1])
