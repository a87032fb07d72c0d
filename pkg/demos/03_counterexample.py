"""Which way does the spectral cut go on the two-scale density?

The density is ``min(eps + |x|, 1/n)`` on a tall thin box. Its sparsest cut
for the (1, 2) sparsity is the vertical line ``x = 0`` through the valley.
The eigenvector of the (1, 2, 2) pencil is blind to that valley and cuts the
box across its long side at ``y = 0``; the (1, 2, 3) eigenvector finds
``x = 0``. The sparsity gap between the two cuts grows like ``n``.
"""
from densitycut import sweepcut

for n, eps in ((64, 0.01 / 64), (256, 0.005 / 256)):
    run = sweepcut.counterexample_orientation(n, eps=eps)
    print(f"n = {n}: grid of {run.vertices} vertices, h = {run.h:.4f}")
    print(f"  (1,2,2) cut: {100 * run.orient_12.across_y0:.0f}% of boundary edges on y = 0, "
          f"phi = {run.phi_12:.4g}")
    print(f"  (1,2,3) cut: {100 * run.orient_13.across_x0:.0f}% of boundary edges on x = 0, "
          f"phi = {run.phi_13:.4g}")
    print(f"  sparsity ratio {run.ratio:.1f}")
