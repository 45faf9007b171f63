"""
Decoherence factor of a qubit coupled to a transverse-field XY chain.

First the closed form is checked against brute-force diagonalization on a
7-spin chain, then |F(t)| is followed on a 1501-spin chain below, at and
above the critical field.

Run:  python3 demos/decoherence_factor.py
"""

from __future__ import annotations

import numpy as np

from critsteer.chain import ChainParams, decoherence_factor, ground_sector
from critsteer.oracle import oracle_factor
from critsteer.power import time_grid

t = time_grid(5.0, 0.05)

# --- small chain: closed form against the dense-matrix oracle
small = ChainParams(L=7, gamma=0.6, lam=0.8, g=0.05)
diff = np.abs(decoherence_factor(small, t) - oracle_factor(small, t))
print(f"L=7 ground sector: {ground_sector(small)}")
print(f"max |closed form - oracle| over {t.size} times: {diff.max():.2e}")

# --- large chain: coherence loss is strongest at the critical field
print("\n  lam   min|F|   mean|F|   |F(5)|")
for lam in (0.2, 0.9, 1.0, 1.1, 1.2):
    f = decoherence_factor(ChainParams(1501, 1.0, lam, 0.01), t)
    a = np.abs(f)
    print(f"{lam:5.2f}  {a.min():7.4f}  {a.mean():8.4f}  {a[-1]:7.4f}")

# without coupling the bath never learns anything about the qubit
print("\ng = 0 gives F = 1:", bool(np.all(decoherence_factor(ChainParams(1501, 1.0, 1.0, 0.0), t) == 1)))
