"""The mollifier and density-adapted smoothing.

The standard bump has ``int |grad phi| <= 2d``. Smoothing with a radius
proportional to the density keeps L1 norms within ``1 +- c`` when the
radius function is ``c``-Lipschitz. Smoothing the indicator of a half-plane
gives a test function whose Rayleigh quotient bounds lambda2 from above.
"""
import numpy as np

from densitycut import densities, mollify

for d in range(1, 6):
    print(f"d = {d}: int |grad phi| = {mollify.grad_l1_norm(d):.4f}  (bound {2 * d})")

f = lambda x: mollify.profile(x / 0.3)
for c in (0.1, 0.3, 0.5):
    r = mollify.l1_sandwich_check(f, lambda x, c=c: 0.05 + c * np.sin(x), c, [(-0.3, 0.3)])
    print(f"c = {c}: {r.lhs:.4f} <= {r.mid:.4f} <= {r.rhs:.4f}")

rho = densities.builtin("uniform", {"dim": 2})
cut = mollify.HalfPlane(0, 0.5)
phi = mollify.halfplane_sparsity(rho, (1, 2, 3), cut)
theta = mollify.buser_theta(phi, rho.lipschitz, (1, 2, 3), 1.0)
w = mollify.buser_witness_nd(rho, (1, 2, 3), cut, theta)
bound = mollify.buser_bound_nd(phi, rho.lipschitz, 2, (1, 2, 3), 1.0, 1.0)
print(f"unit square, cut x = 1/2: phi = {phi:.4g}, theta = {theta:.4g}, "
      f"R(witness) = {w.rayleigh:.4g} <= bound {bound:.4g}; pi^2 = {np.pi ** 2:.4g}")
