"""
Two-stage normal form
=====================

For ``x'' + 2x^3 = p_0 + p_1 x + p_2 x^2`` the Lie-triangle normalization
removes the angle from every term of ``H`` with exponent at least ``2/3``,
using at most one derivative of ``p_1`` and two of ``p_2``.
"""

# %%
import numpy as np

from forcedosc import Forcing, IntegratorConfig, build_gentrig
from forcedosc.diagnostics import twist_coefficients, twist_measure
from forcedosc.normalform import normalize, required_smoothness

g = build_gentrig(2)
f = Forcing.from_terms(2, 1.0, {0: {"cos": [1.0]}, 1: {"sin": [0.3]}, 2: {"cos": [0.0, 0.2]}})
r = normalize(g, f)

# %%
print("smoothness ledger:", required_smoothness(r))
print("convergence threshold K:", r.threshold)
for label, S in (("intermediate", r.H_intermediate), ("special", r.H_special)):
    shape = {q: ("free" if p.is_kappa_free() else "kappa") for q, p in sorted(S.terms_by_exponent().items(), reverse=True)}
    print(f"{label:12s} exponent/3 -> {shape}")

# %%
# The kappa-free rows predict the twist alpha(Lambda) of the period map.
tw = twist_coefficients(r, f)
print("sigma:", tw.sigma)
cfg = IntegratorConfig(rtol=1e-12, atol=1e-13)
for lam in (10.0, 30.0, 100.0):
    m = twist_measure(g, f, cfg, lam)
    print(f"Lambda = {lam:5.0f}: measured {m:.8f}, predicted {float(tw.dalpha(lam)):.8f}")

# %%
# Estimated size of what the truncation left out, at a few actions.
for K in (10.0, 100.0, 1000.0):
    print(f"K = {K:6.0f}: tail bound {r.truncation.bound(K):.2e}")
