"""
Generalized trigonometric functions
===================================

``sn`` and ``cn`` solve ``xi'' + n xi^(2n-1) = 0`` with ``sn(0) = 0``,
``cn = sn'``.  For ``n = 1`` they are sine and cosine; for larger ``n`` the
period shrinks and the Fourier series stays odd-harmonic.
"""

# %%
import numpy as np

from forcedosc import build_gentrig, quarter_period, sn_power_mean, profile

for n in (1, 2, 3, 5):
    print(f"n={n}: tau = {quarter_period(n):.12f}")

# %%
# The identity cn^2 + sn^(2n) = 1 holds to table precision anywhere on the line.
g = build_gentrig(2)
k = np.linspace(-40, 40, 100_001)
sn, cn = g.sncn(k)
print("max identity residual:", np.max(np.abs(cn**2 + sn**4 - 1)))

# %%
# Landmarks: a quarter period takes (0, 1) to (1, 0).
for m in range(4):
    s, c = g.sncn(m * g.tau)
    print(f"kappa = {m} tau: sn = {s:+.3f}, cn = {c:+.3f}")

# %%
# Means over a period come from Beta functions; odd powers average out.
print("mean sn^2 =", sn_power_mean(g, 2, 0))
print("mean sn^4 =", sn_power_mean(g, 4, 0), "(exactly 1/3)")

# %%
# The Fourier series of sn carries only odd harmonics.
c = profile(g, 1, 0).coeffs
print("|c_k|, k = 0..7:", np.round(np.abs(c[:8]), 6))
