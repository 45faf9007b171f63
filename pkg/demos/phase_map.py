"""
Steering weight over anisotropy and time, with the sudden-death boundary.

At lam = 0.2 death only appears near gamma = 0, at the critical field it
appears for every gamma given enough time, and at lam = 1.2 it never does.

Run:  python3 demos/phase_map.py
"""

from __future__ import annotations

import numpy as np

from critsteer.chain import ChainParams
from critsteer.power import gamma_time_map, time_grid

gammas = np.linspace(0.05, 1.0, 8)
t = time_grid(20.0, 0.1)
for lam in (0.2, 1.0, 1.2):
    m = gamma_time_map(ChainParams(1501, 1.0, lam, 0.01), gammas, t)
    print(f"\nlam = {lam}  (all solves optimal: {bool(m.ok.all())})")
    print(" gamma   mean W   death t")
    for g, row, d in zip(m.gammas, m.weights, m.death):
        print(f"{g:6.3f}  {row.mean():7.3f}  {'never' if np.isnan(d) else f'{d:.2f}':>8}")
