"""
Shadowing and decay orders
==========================

Transport a point of the normal-form flow back to the original chart and
check that it tracks the true orbit over one period.  Then fit the decay of
the Morris corrections ``F`` and ``G``: ``G`` falls like ``Lambda^-2``, and so
does ``F`` (faster than the ``Lambda^-1`` bound).
"""

# %%
import numpy as np

from forcedosc import Forcing, IntegratorConfig, build_gentrig, morris_forcing
from forcedosc.diagnostics import decay_fit
from forcedosc.normalform import normalize
from forcedosc.normalform.transport import conjugacy_check

g = build_gentrig(2)
f = Forcing.from_terms(2, 1.0, {0: {"cos": [1.0]}, 1: {"sin": [0.3]}, 2: {"cos": [0.0, 0.2]}})
r = normalize(g, f)
rep = conjugacy_check(g, f, r)
print(f"K0 = {rep.K0:.3f}: dK = {rep.dK:.2e} (bound {rep.bound_K:.2e}), dkappa = {rep.dkappa:.2e} (bound {rep.bound_kappa:.2e})")

# %%
lams = np.geomspace(10, 100, 8)
fit = decay_fit(g, morris_forcing(), IntegratorConfig(), lams)
print("Morris slope_F =", round(fit.slope_F, 3), " slope_G =", round(fit.slope_G, 3))
print("F * Lambda^2:", np.round(fit.F_max * lams**2, 3))

# %%
# For the full forcing the near-identity change moves Lambda by O(1), so the
# decay shows only in normal-form coordinates.
fit = decay_fit(g, f, IntegratorConfig(), lams, coordinates="special")
print("full forcing, special coordinates: slope_F =", round(fit.slope_F, 3), " slope_G =", round(fit.slope_G, 3))
