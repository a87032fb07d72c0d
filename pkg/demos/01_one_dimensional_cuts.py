"""Sparsity against eigenvalue for 1D densities.

A density with a deep dip at the origin, ``|x| + eps``, is the standard
stress test. On the admissible exponents (1, 2, 3) the best cut sits in the
dip and the Cheeger and Buser inequalities both hold for every eps. With
(1, 1, 1) the eigenvalue no longer tracks the sparsity and the ratio
``lambda2 / max(phi, phi^2)`` grows without bound as eps shrinks.
"""
import numpy as np

from densitycut import densities, oned, sweepcut


def table(exponents):
    print(f"\nexponents {exponents}")
    print(f"{'eps':>8} {'phi':>12} {'lambda2':>12} {'witness':>12} {'ratio':>10}  Cheeger Buser")
    for eps in (1e-1, 1e-2, 1e-3, 1e-4):
        rho = densities.builtin("abs_eps", {"eps": eps})
        r = oned.analyze_1d(rho, exponents)
        chk = sweepcut.verify_inequalities(r.phi, r.lambda2, r.lipschitz, 1, exponents)
        ratio = r.lambda2 / max(r.phi, r.phi ** 2)
        print(f"{eps:8.0e} {r.phi:12.4e} {r.lambda2:12.4e} {r.witness:12.4e} {ratio:10.3g}"
              f"  {chk.cheeger_holds!s:7} {chk.buser_holds}")


table((1, 2, 3))
table((1, 1, 1))

# The plateau density of width n and height 1/n shows how the quantities
# scale with n: phi ~ n^(alpha - beta - 1) and lambda2 ~ n^(alpha - gamma - 2).
ns = np.array([1e2, 1e3, 1e4])
res = [oned.analyze_1d(densities.builtin("plateau", {"n": n}), (1, 2, 3)) for n in ns]
s_phi = np.polyfit(np.log(ns), np.log([r.phi for r in res]), 1)[0]
s_lam = np.polyfit(np.log(ns), np.log([r.lambda2 for r in res]), 1)[0]
print(f"\nplateau slopes at (1, 2, 3): phi {s_phi:.3f} (expect -2), lambda2 {s_lam:.3f} (expect -4)")

# The weighted Hardy constant brackets lambda2 from both sides.
rho = densities.builtin("abs_eps", {"eps": 0.1})
lo, hi = oned.muckenhoupt_bound(rho, (1, 2, 3))
lam = oned.lambda2_1d_fem(rho, (1, 2, 3)).lambda2
print(f"Hardy bracket for abs_eps(0.1): {lo:.4g} <= lambda2 = {lam:.4g} <= {hi:.4g}")
