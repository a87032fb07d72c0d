"""Iterated cutting on two noisy half moons.

Each round cuts the current region along the best level set of its second
eigenvector and keeps the heaviest connected piece. At (1, 2, 3) the first
cut already runs through the sparse gap between the moons and keeps one moon.
At (1, 1, 1) the cut ignores the gap and the surviving region is unbalanced.
"""
import numpy as np

from densitycut import densities, export, sweepcut

rho = densities.builtin("half_moons")
for ex in ((1, 2, 3), (1, 1, 1)):
    res = sweepcut.algorithm2(rho, ex, 0.04)
    g = res.grid
    inside = g.as_mask(res.region)
    crossing = inside[g.eu] != inside[g.ev]
    mean_rho = np.sum(g.cell_areas * g.vertex_rho) / np.sum(g.cell_areas)
    print(f"exponents {ex}: {len(res.trail)} round(s), kept {res.region_mass / res.total_mass:.3f} "
          f"of the mass; mean density on the boundary {np.mean(g.edge_rho[crossing]):.3f} "
          f"vs domain mean {mean_rho:.3f}")
    for r in res.trail:
        print(f"  round {r.index}: phi {r.phi:.4g}, lambda2 {r.lambda2:.4g}, kept the {r.kept_side}")

coarse = sweepcut.algorithm2(rho, (1, 2, 3), 0.1)
print()
print(export.mask_to_pgm(coarse.grid.as_mask(coarse.region).reshape(coarse.grid.shape)))
