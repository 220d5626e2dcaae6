"""
Boundedness scan
================

Iterate the period map from many starting actions and watch the envelope
``[min K, max K]`` of each orbit.  No orbit should escape; envelopes stay
within a factor of about two.
"""

# %%
import os

import numpy as np

from forcedosc import Forcing, IntegratorConfig, build_gentrig
from forcedosc.diagnostics import boundedness_scan, default_seeds

g = build_gentrig(2)
f = Forcing.from_terms(2, 1.0, {0: {"cos": [1.0]}, 1: {"sin": [0.3]}, 2: {"cos": [0.0, 0.2]}})
seeds = default_seeds(g, 10, (5.0, 50.0))
rep = boundedness_scan(g, f, IntegratorConfig(), seeds, iters=2000, jobs=os.cpu_count() or 1)

# %%
for s in rep.seeds:
    print(f"K0 = {s.K0:6.2f}: K in [{s.K_min:7.3f}, {s.K_max:7.3f}], ratio {s.envelope_ratio:.3f}")
print(rep.annulus())
