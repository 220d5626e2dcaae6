"""
The period map in action-angle variables
========================================

Integrate ``x'' + 2x^3 = cos(2 pi t)`` over one period (backwards, from 0 to
-T) and read off ``Lambda* = Lambda + F``, ``kappa* = kappa + T Lambda + G``.
"""

# %%
import numpy as np

from forcedosc import ActionAngleState, IntegratorConfig, build_gentrig, morris_forcing, period_map_jacobian, zero_forcing
from forcedosc.flow import K_from_lam, lam_from_K, period_map_arrays

g = build_gentrig(2)
cfg = IntegratorConfig(rtol=1e-12, atol=1e-13)

# %%
# Without forcing the action is conserved and the angle advances by T Lambda.
K, kap, _ = period_map_arrays(g, zero_forcing(2), cfg, 8.0, 0.5)
print("unforced: K* =", K[0], " kappa* - kappa =", kap[0] - 0.5, "(Lambda = 2)")

# %%
# With forcing the corrections shrink as Lambda grows.
f = morris_forcing()
kappas = np.linspace(0, g.period, 16, endpoint=False)
for lam in (10.0, 20.0, 50.0, 100.0):
    K = np.full(kappas.size, K_from_lam(2, lam))
    Ks, ks, _ = period_map_arrays(g, f, cfg, K, kappas)
    F = lam_from_K(2, Ks) - lam
    G = ks - kappas - lam
    print(f"Lambda = {lam:5.0f}: max|F| = {np.max(np.abs(F)):.3e}, max|G| = {np.max(np.abs(G)):.3e}")

# %%
# The map is area preserving.
J = period_map_jacobian(g, f, cfg, ActionAngleState(10.0, 0.3), h=1e-5)
print("det J - 1 =", np.linalg.det(J) - 1)
