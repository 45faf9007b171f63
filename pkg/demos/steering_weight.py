"""
Temporal steering weight from the semidefinite program.

W is the smallest fraction of the assemblage that no hidden-state model can
explain.  With two equatorial measurements W hits exactly zero (sudden death)
at the critical field; a third direction keeps it alive.  Every solve comes
with a dual certificate, so the printed gaps bound the error in W.

Run:  python3 demos/steering_weight.py
"""

from __future__ import annotations

import numpy as np

from critsteer.chain import ChainParams, decoherence_factor
from critsteer.power import death_time, time_grid
from critsteer.steering import build_measurements, default_angles
from critsteer.weight import assemblage_stack, build_assemblage, ts_weight, ts_weight_batch

# one assemblage by hand
sol = ts_weight(build_assemblage(0.8 * np.exp(0.3j), build_measurements(*default_angles(2), 2)))
print(f"single solve: W = {sol.weight:.6f}, gap = {sol.gap:.1e}, status = {sol.status}")

t = time_grid(5.0, 0.05)
print("\n  lam  N   mean W   min W   death t   max gap")
for lam in (0.2, 1.0, 1.2):
    f = decoherence_factor(ChainParams(1501, 1.0, lam, 0.01), t)
    for n in (2, 3):
        sols = ts_weight_batch(assemblage_stack(f, build_measurements(*default_angles(n), n)))
        w = np.array([s.weight for s in sols])
        gap = max(abs(s.gap) for s in sols)
        mean = np.trapezoid(w, t) / t[-1]
        death = death_time(t, w)
        death = "never" if np.isnan(death) else f"{death:.2f}"
        print(f"{lam:5.1f}  {n}  {mean:7.3f}  {w.min():6.3f}  {death:>8}  {gap:8.1e}")
