"""
Qubit states, projective measurements and the dephasing map.

Basis: index 0 is |1> (sz = +1), index 1 is |0>.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "NonPhysicalFactorError",
    "ZeroProbabilityBranch",
    "Projector",
    "validate_state",
    "maximally_mixed",
    "pure_state",
    "bloch_projector",
    "apply_dephasing",
    "measure",
]

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)

STATE_TOL = 1e-12
ZERO_PROB = 1e-14


class NonPhysicalFactorError(ValueError):
    pass


class ZeroProbabilityBranch(ArithmeticError):
    """Outcome has (numerically) vanishing probability."""


@dataclass(frozen=True)
class Projector:
    """Rank-1 projector for outcome ``a`` of measurement ``i``."""

    matrix: np.ndarray = field(repr=False)
    i: int = 1
    a: int = 1

    @property
    def bloch(self) -> np.ndarray:
        m = self.matrix
        return np.real([np.trace(m @ SX), np.trace(m @ SY), np.trace(m @ SZ)])


def validate_state(rho, tol: float = STATE_TOL) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"qubit state must be 2x2, got shape {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > tol:
        raise ValueError("state is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise ValueError(f"state trace is {np.trace(rho).real:.3e}, expected 1")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ValueError("state is not positive semidefinite")
    return rho


def maximally_mixed() -> np.ndarray:
    return I2 / 2


def pure_state(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def bloch_projector(n, i: int = 1, a: int = 1) -> Projector:
    """Projector onto outcome ``a`` of the spin along unit vector ``n``."""
    n = np.asarray(n, dtype=float)
    n = n / np.linalg.norm(n)
    m = 0.5 * (I2 + a * (n[0] * SX + n[1] * SY + n[2] * SZ))
    return Projector(matrix=m, i=i, a=a)


def apply_dephasing(rho0, f: complex, tol: float = 1e-9) -> np.ndarray:
    """Keep populations, scale the (1,0) coherence by ``f`` and (0,1) by ``conj(f)``."""
    if abs(f) > 1 + tol:
        raise NonPhysicalFactorError(f"|F| = {abs(f):.6g} exceeds 1")
    rho = np.array(rho0, dtype=complex)
    rho[0, 1] *= np.conj(f)
    rho[1, 0] *= f
    return rho


def measure(rho, p: Projector) -> tuple[float, np.ndarray]:
    """Return ``(Tr[P rho], P rho P / Tr[P rho])``.

    Raises :class:`ZeroProbabilityBranch` when the outcome cannot occur.
    """
    P = p.matrix
    prob = float(np.real(np.trace(P @ rho)))
    if prob < ZERO_PROB:
        raise ZeroProbabilityBranch(f"outcome a={p.a} of measurement {p.i} has probability {prob:.3e}")
    post = P @ rho @ P / prob
    return prob, post
