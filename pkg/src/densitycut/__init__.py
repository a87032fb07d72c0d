"""Density-weighted isoperimetric cuts and spectral partitioning.

The package computes the (alpha, beta)-sparsity of cuts and the
(alpha, gamma)-weighted eigenvalue of a density on an interval or a
rectangle. Spectral sweep cuts on a grid discretization are checked against
the Cheeger and Buser inequalities that tie the two together.
"""
__version__ = "0.1.0"

from .densities import (Density, Domain, ExponentTriple, builtin, eval_density, from_spec,
                        mass, scale)
from .eigensolve import EigenPair, second_eigenpair
from .grid2d import Grid2D, GridCut, build_grid, connected_components, cut_sparsity, laplacian_mass
from .oned import lambda2_1d_fem, muckenhoupt_bound, sweep_sparsity_1d
from .sweepcut import CutReport, algorithm1, algorithm2, sweep_cut, verify_inequalities
from .mollify import Mollifier, buser_witness_nd, grad_l1_norm, l1_sandwich_check
from .cluster import PointCloud, affinity, cluster_13, cluster_baseline

__all__ = [
    "Density", "Domain", "ExponentTriple", "builtin", "eval_density", "from_spec", "mass",
    "scale", "EigenPair", "second_eigenpair", "Grid2D", "GridCut", "build_grid",
    "connected_components", "cut_sparsity", "laplacian_mass", "lambda2_1d_fem",
    "muckenhoupt_bound", "sweep_sparsity_1d", "CutReport", "algorithm1", "algorithm2",
    "sweep_cut", "verify_inequalities", "Mollifier", "buser_witness_nd", "grad_l1_norm",
    "l1_sandwich_check", "PointCloud", "affinity", "cluster_13", "cluster_baseline",
]
