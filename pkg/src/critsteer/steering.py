"""
Measurement sets parameterized by two rotation angles, and the temporal
steering parameter S_N (N = 2, 3) computed both in closed form and by
explicitly collapsing, dephasing and measuring the qubit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import (SX, SY, SZ, I2, Projector, ZeroProbabilityBranch, apply_dephasing,
                      bloch_projector, maximally_mixed, measure, validate_state)

__all__ = [
    "MeasurementSet",
    "build_measurements",
    "measurements_from_axes",
    "default_angles",
    "ts_parameter_numeric",
    "s2_analytic",
    "s3_analytic",
    "s_max",
]

_KET1 = np.array([1.0, 0.0], dtype=complex)
_KET_PLUS_X = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)


def _ux(theta):
    return np.cos(theta / 2) * I2 + 1j * np.sin(theta / 2) * SX


def _uy(phi):
    return np.cos(phi / 2) * I2 + 1j * np.sin(phi / 2) * SY


def _projector(ket, i, a):
    return Projector(matrix=np.outer(ket, ket.conj()), i=i, a=a)


@dataclass(frozen=True)
class MeasurementSet:
    """``n`` two-outcome measurements; ``projectors[i] = (P_plus, P_minus)``."""

    theta: float
    phi: float
    n: int
    projectors: tuple

    @property
    def axes(self) -> np.ndarray:
        """Bloch vectors of the ``+1`` outcomes, shape ``(n, 3)``."""
        return np.array([pair[0].bloch for pair in self.projectors])

    def conjugated(self, U) -> "MeasurementSet":
        """Same set with every projector replaced by ``U P U^dagger``."""
        U = np.asarray(U, dtype=complex)
        pairs = tuple(tuple(Projector(matrix=U @ p.matrix @ U.conj().T, i=p.i, a=p.a) for p in pair)
                      for pair in self.projectors)
        return MeasurementSet(self.theta, self.phi, self.n, pairs)


def build_measurements(theta: float, phi: float, n: int) -> MeasurementSet:
    """Mutually orthogonal measurement axes from the angles ``(theta, phi)``.

    Direction 1 is ``Uy(phi) Ux(theta)|1>``, direction 2 the same with
    ``theta + pi/2``, direction 3 ``Uy(phi)|+x>`` which is orthogonal to both.
    The ``-1`` outcomes use ``theta + pi`` and ``theta + 3 pi/2`` (or ``|-x>``).
    """
    if n not in (2, 3):
        raise ValueError(f"n must be 2 or 3, got {n!r}")
    uy = _uy(phi)
    kets = [
        (uy @ _ux(theta) @ _KET1, uy @ _ux(theta + np.pi) @ _KET1),
        (uy @ _ux(theta + np.pi / 2) @ _KET1, uy @ _ux(theta + 3 * np.pi / 2) @ _KET1),
    ]
    if n == 3:
        kets.append((uy @ _KET_PLUS_X, uy @ SZ @ _KET_PLUS_X))
    pairs = tuple((_projector(kp, i + 1, +1), _projector(km, i + 1, -1))
                  for i, (kp, km) in enumerate(kets))
    return MeasurementSet(float(theta), float(phi), n, pairs)


def measurements_from_axes(axes) -> MeasurementSet:
    """Measurement set from explicit Bloch axes (angles recorded as NaN)."""
    axes = np.atleast_2d(np.asarray(axes, dtype=float))
    if axes.shape[0] not in (2, 3) or axes.shape[1] != 3:
        raise ValueError(f"need 2 or 3 axes of length 3, got shape {axes.shape}")
    pairs = tuple((bloch_projector(ax, i + 1, +1), bloch_projector(ax, i + 1, -1))
                  for i, ax in enumerate(axes))
    return MeasurementSet(float("nan"), float("nan"), axes.shape[0], pairs)


def default_angles(n: int) -> tuple[float, float]:
    """Angles used for weight curves: equatorial {sx, sy} for n = 2, {sz, sy, sx} for n = 3."""
    if n == 2:
        return 0.0, np.pi / 2
    if n == 3:
        return 0.0, 0.0
    raise ValueError(f"n must be 2 or 3, got {n!r}")


def ts_parameter_numeric(f, meas: MeasurementSet, rho0=None) -> float:
    """S_N by collapsing ``rho0`` on Alice's outcomes and measuring the dephased state.

    ``f`` is the decoherence factor or a sample carrying it in ``.f``.
    """
    f = complex(getattr(f, "f", f))
    rho0 = maximally_mixed() if rho0 is None else validate_state(rho0)
    total = 0.0
    for p_plus, p_minus in meas.projectors:
        observable = p_plus.matrix - p_minus.matrix
        for p in (p_plus, p_minus):
            try:
                prob, post = measure(rho0, p)
            except ZeroProbabilityBranch:
                continue
            evolved = apply_dephasing(post, f)
            expect = float(np.real(np.trace(observable @ evolved)))
            total += prob * expect**2
    return total


def _e12(theta, phi, re_f):
    c2p = np.cos(phi) ** 2
    e1 = (np.cos(theta) ** 2 * c2p * (1 - re_f) + re_f) ** 2
    e2 = (np.sin(theta) ** 2 * c2p * (1 - re_f) + re_f) ** 2
    return e1, e2


def s2_analytic(theta, phi, re_f):
    e1, e2 = _e12(theta, phi, re_f)
    return e1 + e2


def s3_analytic(theta, phi, re_f):
    e1, e2 = _e12(theta, phi, re_f)
    e3 = (np.cos(phi) ** 2 * re_f + np.sin(phi) ** 2) ** 2
    return e1 + e2 + e3


def s_max(n: int, re_f):
    if n not in (2, 3):
        raise ValueError(f"n must be 2 or 3, got {n!r}")
    return 1 + (n - 1) * np.asarray(re_f) ** 2
