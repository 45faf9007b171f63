"""
Steering-weight power across the transverse field.

The power is the best time-averaged weight over random measurement sets.
It dips at the two critical fields lam = -1 and lam = +1.  This demo uses
fewer samples and a coarser grid than a full study, so it runs in a few
minutes; pass workers > 1 to spread the solves over processes.

Run:  python3 demos/power_sweep.py
"""

from __future__ import annotations

import numpy as np

from critsteer.chain import ChainParams
from critsteer.power import PowerConfig, lambda_sweep

cfg = PowerConfig(n=2, t_b=10.0, t_step=0.25, samples=20, seed=0)
lams = np.round(np.arange(-1.5, 1.51, 0.1), 10)
points = lambda_sweep(ChainParams(1501, 1.0, 0.0, 0.01), lams, cfg)

print("   lam   power   best (theta, phi)")
for p in points:
    th, ph = p.result.best_angles
    print(f"{p.value:6.2f}  {p.result.power:6.4f}   ({th:.2f}, {ph:.2f})")

power = np.array([p.result.power for p in points])
print("two smallest at lam =", sorted(lams[np.argsort(power)[:2]].tolist()))
