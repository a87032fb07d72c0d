"""Two-way spectral clustering of point samples with a Gaussian affinity.

Both variants build ``A_ij = exp(-n^(2/d) |s_i - s_j|^2)`` (zero diagonal)
with degrees ``D = diag(A 1)`` and reweight it. The Fiedler vector of the
reweighted Laplacian is swept for the level set of least conductance:

* :func:`cluster_13` uses ``W = D^(1/2) A D^(1/2)``, the sample analogue of
  the (1, 3) exponents;
* :func:`cluster_baseline` uses the classical ``W = D^(-1/2) A D^(-1/2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph
from scipy.spatial.distance import pdist, squareform

from .eigensolve import second_eigenpair
from .errors import BadParams, DisconnectedGraph
from .sweepcut import sweep_graph

PRUNE_ABOVE = 2000
PRUNE_BELOW = 1e-12


@dataclass(frozen=True, eq=False)
class PointCloud:
    """``n`` points in ``R^d`` stored as an ``(n, d)`` array."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 2 or pts.shape[1] < 1:
            raise BadParams("a point cloud needs at least two points with d >= 1")
        if not np.all(np.isfinite(pts)):
            raise BadParams("coordinates must be finite")
        object.__setattr__(self, "points", pts)

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def d(self):
        return self.points.shape[1]


@dataclass
class ClusterResult:
    labels: np.ndarray
    threshold: float
    conductance: float
    eigvec: np.ndarray = field(repr=False)
    variant: str = "1,3"


def _cloud(points):
    return points if isinstance(points, PointCloud) else PointCloud(points)


def affinity(points, bandwidth=None):
    """Dense Gaussian affinity with ``n^(2/d)`` bandwidth and zero diagonal.

    ``bandwidth`` overrides the factor multiplying the squared distance.
    """
    cloud = _cloud(points)
    k = cloud.n ** (2.0 / cloud.d) if bandwidth is None else float(bandwidth)
    if not k > 0:
        raise BadParams("bandwidth must be positive")
    A = squareform(np.exp(-k * pdist(cloud.points, "sqeuclidean")))
    np.fill_diagonal(A, 0.0)
    return A


def conductance(W, labels):
    """``w(S, S^c) / min(vol S, vol S^c)`` with volumes from the degrees of ``W``."""
    W = np.asarray(W.toarray() if sp.issparse(W) else W, dtype=float)
    s = np.asarray(labels) == 1
    if s.all() or not s.any():
        raise BadParams("both clusters must be nonempty")
    deg = W.sum(axis=1)
    cut = math.fsum(W[np.ix_(s, ~s)].ravel())
    return cut / min(math.fsum(deg[s]), math.fsum(deg[~s]))


def _run(points, power, tol, seed, bandwidth, variant):
    cloud = _cloud(points)
    A = affinity(cloud, bandwidth)
    if cloud.n > PRUNE_ABOVE:
        A[A < PRUNE_BELOW] = 0.0
    ncomp, _ = csgraph.connected_components(sp.csr_matrix(A > 0), directed=False)
    if ncomp > 1:
        raise DisconnectedGraph(f"the affinity graph has {ncomp} components")
    dA = A.sum(axis=1)
    s = dA ** power
    W = s[:, None] * A * s[None, :]
    deg = W.sum(axis=1)
    L = sp.csr_matrix(np.diag(deg) - W)
    pair = second_eigenpair(L, np.ones(cloud.n), tol=tol, seed=seed)
    iu, iv = np.triu_indices(cloud.n, k=1)
    w = W[iu, iv]
    res = sweep_graph(iu, iv, w, deg, pair.vector)
    labels = np.full(cloud.n, 2, dtype=int)
    labels[res.members] = 1
    return ClusterResult(labels, res.threshold, res.phi, pair.vector, variant)


def cluster_13(points, tol=1e-10, seed=0, bandwidth=None):
    """Clusters ``{u > t}`` (label 1) and ``{u <= t}`` (label 2) for ``W = D^(1/2) A D^(1/2)``."""
    return _run(points, 0.5, tol, seed, bandwidth, "1,3")


def cluster_baseline(points, tol=1e-10, seed=0, bandwidth=None):
    """As :func:`cluster_13` with the classical ``W = D^(-1/2) A D^(-1/2)``."""
    return _run(points, -0.5, tol, seed, bandwidth, "baseline")


def load_points(path):
    """One point per CSV row."""
    pts = np.loadtxt(path, delimiter=",", ndmin=2)
    return PointCloud(pts)


def write_labels(path_or_file, labels):
    """CSV with header ``index,label``."""
    lines = ["index,label"] + [f"{i},{int(l)}" for i, l in enumerate(labels)]
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w") as fh:
            fh.write(text)
