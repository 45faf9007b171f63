"""
Brute-force reference for small chains: dense Hamiltonians in the spin basis,
exact ground states and the decoherence factor from full eigendecompositions.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .chain import ChainParams

__all__ = [
    "MAX_ORACLE_L",
    "DEGENERACY_GAP",
    "DegenerateGroundStateWarning",
    "DenseHamiltonian",
    "GroundState",
    "dense_hamiltonian",
    "ground_state",
    "oracle_factor",
]

MAX_ORACLE_L = 12
DEGENERACY_GAP = 1e-10

_SX = sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
# sy sy is real, so build it from i*sy = [[0, 1], [-1, 0]] and flip the sign.
_ISY = sp.csr_matrix(np.array([[0.0, 1.0], [-1.0, 0.0]]))
_SZ = sp.csr_matrix(np.array([[1.0, 0.0], [0.0, -1.0]]))


class DegenerateGroundStateWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class DenseHamiltonian:
    dim: int
    entries: np.ndarray
    shift: str
    field: float


@dataclass(frozen=True)
class GroundState:
    vector: np.ndarray
    energy: float
    gap: float
    degenerate: bool


def _site_op(op, site, L):
    left = sp.identity(2**site, format="csr")
    right = sp.identity(2 ** (L - site - 1), format="csr")
    return sp.kron(sp.kron(left, op), right, format="csr")


def _field_for(params: ChainParams, shift: str) -> float:
    try:
        return {"plus": params.lam_plus, "minus": params.lam_minus, "none": params.lam}[shift]
    except KeyError:
        raise ValueError(f"shift must be 'plus', 'minus' or 'none', got {shift!r}") from None


def dense_hamiltonian(params: ChainParams, shift: str = "none") -> DenseHamiltonian:
    """Periodic XY chain at field ``lam``, ``lam + g`` or ``lam - g`` as a dense matrix."""
    L = params.L
    if L > MAX_ORACLE_L:
        raise MemoryError(f"dense oracle limited to L <= {MAX_ORACLE_L}, got L = {L}")
    x = _field_for(params, shift)
    g = params.gamma
    dim = 2**L
    sx = [_site_op(_SX, l, L) for l in range(L)]
    isy = [_site_op(_ISY, l, L) for l in range(L)]
    sz = [_site_op(_SZ, l, L) for l in range(L)]
    H = sp.csr_matrix((dim, dim))
    for l in range(L):
        m = (l + 1) % L
        H = H - 0.5 * (1 + g) * (sx[l] @ sx[m]) + 0.5 * (1 - g) * (isy[l] @ isy[m]) - x * sz[l]
    return DenseHamiltonian(dim=dim, entries=H.toarray(), shift=shift, field=x)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    mag = np.abs(v)
    idx = int(np.argmax(mag >= mag.max() * (1 - 1e-9)))
    phase = v[idx] / abs(v[idx])
    return v / phase


def ground_state(H: DenseHamiltonian) -> GroundState:
    """Lowest eigenvector with a deterministic phase.

    The first component of largest magnitude is made real and positive.  A gap
    below ``DEGENERACY_GAP`` is flagged and warned about, not resolved.
    """
    w, v = np.linalg.eigh(H.entries)
    gap = float(w[1] - w[0])
    degenerate = gap < DEGENERACY_GAP
    if degenerate:
        warnings.warn(f"ground space degenerate (gap = {gap:.3e})", DegenerateGroundStateWarning,
                      stacklevel=2)
    vec = _fix_phase(v[:, 0].astype(complex))
    return GroundState(vector=vec, energy=float(w[0]), gap=gap, degenerate=degenerate)


def oracle_factor(params: ChainParams, t, conjugate: bool = False):
    """``<psi| exp(+i H_+ t) exp(-i H_- t) |psi>`` by exact evolution.

    ``conjugate=True`` gives the opposite ordering, which is the complex
    conjugate.  Accepts a scalar or an array of times.
    """
    t_arr = np.asarray(t, dtype=float)
    psi = ground_state(dense_hamiltonian(params, "none")).vector
    wp, vp = np.linalg.eigh(dense_hamiltonian(params, "plus").entries)
    wm, vm = np.linalg.eigh(dense_hamiltonian(params, "minus").entries)
    cm = vm.T @ psi
    overlap = vp.T @ vm
    bra = (vp.T @ psi).conj()
    ts = t_arr.reshape(-1)
    out = np.empty(ts.size, dtype=complex)
    for i, ti in enumerate(ts):
        phi = overlap @ (np.exp(-1j * wm * ti) * cm)
        out[i] = bra @ (np.exp(1j * wp * ti) * phi)
    if conjugate:
        out = out.conj()
    out = out.reshape(t_arr.shape)
    return complex(out) if out.ndim == 0 else out
