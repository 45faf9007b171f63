"""
Closed-form spectral data of the periodic XY chain and the decoherence factor
it imprints on a central qubit.

The chain is ``H_e = -sum_l [(1+gamma)/2 sx sx + (1-gamma)/2 sy sy + lam sz]``
with ``L = 2M + 1`` sites; the qubit couples through ``g sz sum_l sz_l`` so the
two qubit branches see the field shifted to ``lam + g`` and ``lam - g``.

After the Jordan-Wigner mapping the spin ground state lives in one of two
fermion-parity sectors.  The "periodic" sector uses momenta ``q = 2 pi k / L``
(unpaired mode at q = 0), the "antiperiodic" sector ``q = 2 pi (k - 1/2) / L``
(unpaired mode at q = pi).  Which one holds the ground state depends on
``lam``; :func:`ground_sector` decides by comparing the two sector energies.

Convention: ``F(t) = <psi| exp(+i H_+ t) exp(-i H_- t) |psi>`` with ``H_+`` at
field ``lam + g``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChainParams",
    "ModeSpectrum",
    "DecoherenceSample",
    "CutoffApprox",
    "SingularParameterError",
    "SECTORS",
    "FACTOR_CONVENTION",
    "momenta",
    "mode_spectrum",
    "sector_energy",
    "ground_sector",
    "decoherence_factor",
    "decoherence_trace",
    "factor_norm_direct",
    "cutoff_bound",
    "cutoff_energy",
    "gaussian_rate",
    "log_bound_approx",
]

SECTORS = ("periodic", "antiperiodic")
FACTOR_CONVENTION = "F(t) = <psi|exp(+i H(lam+g) t) exp(-i H(lam-g) t)|psi>"

# |1 - lam_pm| below this is treated as sitting on the critical field.
_SINGULAR_EPS = 1e-12


class SingularParameterError(ValueError):
    """Raised when an approximation is evaluated at a divergent parameter."""


@dataclass(frozen=True)
class ChainParams:
    """Spin count ``L``, anisotropy ``gamma``, field ``lam`` and qubit coupling ``g``."""

    L: int
    gamma: float
    lam: float
    g: float

    def __post_init__(self):
        if isinstance(self.L, bool) or int(self.L) != self.L:
            raise ValueError(f"L must be an integer, got {self.L!r}")
        object.__setattr__(self, "L", int(self.L))
        for name in ("gamma", "lam", "g"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)
        if self.L < 3 or self.L % 2 == 0:
            raise ValueError(f"L must be odd and >= 3, got {self.L}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.g < 0:
            raise ValueError(f"g must be non-negative, got {self.g}")

    @property
    def M(self) -> int:
        return (self.L - 1) // 2

    @property
    def lam_plus(self) -> float:
        return self.lam + self.g

    @property
    def lam_minus(self) -> float:
        return self.lam - self.g

    def replace(self, **changes) -> "ChainParams":
        fields = dict(L=self.L, gamma=self.gamma, lam=self.lam, g=self.g)
        fields.update(changes)
        return ChainParams(**fields)


@dataclass(frozen=True)
class ModeSpectrum:
    """Frequencies and Bogoliubov angles of one (q, -q) pair.

    ``omega*`` are the (non-positive) pair energies, ``theta*`` the rotation
    angles in (-pi, pi] at ``lam``, ``lam + g``, ``lam - g``, and
    ``alpha_pm = theta - theta_pm``.
    """

    k: int
    q: float
    omega: float
    omega_plus: float
    omega_minus: float
    theta: float
    theta_plus: float
    theta_minus: float
    alpha_plus: float
    alpha_minus: float


@dataclass(frozen=True)
class DecoherenceSample:
    t: float
    f: complex
    abs_f: float
    re_f: float


@dataclass(frozen=True)
class CutoffApprox:
    k_c: int
    e_kc: float
    r_c: float


def momenta(L: int, sector: str = "periodic") -> np.ndarray:
    """Pair momenta ``q_k`` for ``k = 1..M`` in the given parity sector."""
    M = (L - 1) // 2
    k = np.arange(1, M + 1, dtype=float)
    if sector == "periodic":
        return 2.0 * np.pi * k / L
    if sector == "antiperiodic":
        return 2.0 * np.pi * (k - 0.5) / L
    raise ValueError(f"unknown sector {sector!r}; expected one of {SECTORS}")


def _omega_theta(gamma, x, q):
    c, s = np.cos(q), np.sin(q)
    omega = -2.0 * np.sqrt((x - c) ** 2 + gamma**2 * s**2)
    # Full-range angle with sin = 2 gamma sin q / omega, cos = 2 (x - cos q) / omega.
    # Adding 0.0 turns -0.0 into +0.0 so that gamma = 0 yields 0 or pi, never -pi.
    theta = np.arctan2(-2.0 * gamma * s + 0.0, 2.0 * (c - x) + 0.0)
    return omega, theta


def _spectrum_arrays(params: ChainParams, sector: str):
    q = momenta(params.L, sector)
    om, th = _omega_theta(params.gamma, params.lam, q)
    op, tp = _omega_theta(params.gamma, params.lam_plus, q)
    omm, tm = _omega_theta(params.gamma, params.lam_minus, q)
    return q, om, op, omm, th, tp, tm


def mode_spectrum(params: ChainParams, k: int, sector: str = "periodic") -> ModeSpectrum:
    if not 1 <= k <= params.M:
        raise ValueError(f"mode index k must lie in 1..{params.M}, got {k}")
    q = momenta(params.L, sector)[k - 1]
    om, th = _omega_theta(params.gamma, params.lam, q)
    op, tp = _omega_theta(params.gamma, params.lam_plus, q)
    omm, tm = _omega_theta(params.gamma, params.lam_minus, q)
    return ModeSpectrum(
        k=k, q=float(q), omega=float(om), omega_plus=float(op), omega_minus=float(omm),
        theta=float(th), theta_plus=float(tp), theta_minus=float(tm),
        alpha_plus=float(th - tp), alpha_minus=float(th - tm),
    )


def sector_energy(L: int, gamma: float, x: float, sector: str) -> float:
    """Lowest energy of the chain at field ``x`` restricted to one parity sector."""
    omega, _ = _omega_theta(gamma, x, momenta(L, sector))
    unpaired = (x - 1.0) if sector == "periodic" else -(x + 1.0)
    return float(np.sum(omega) + unpaired)


def ground_sector(params: ChainParams) -> str:
    """Parity sector holding the ground state at the unshifted field.

    Exact ties go to the periodic sector.
    """
    e_p = sector_energy(params.L, params.gamma, params.lam, "periodic")
    e_a = sector_energy(params.L, params.gamma, params.lam, "antiperiodic")
    return "antiperiodic" if e_a < e_p else "periodic"


def _sector_phase_sign(sector: str) -> float:
    # The unpaired mode contributes exp(i t [u(lam+g) - u(lam-g)]).
    return 1.0 if sector == "periodic" else -1.0


def _mode_factors(params: ChainParams, t: np.ndarray, sector: str, relative_angles: bool):
    _, _, op, om, th, tp, tm = _spectrum_arrays(params, sector)
    t = np.asarray(t, dtype=float)[..., None]
    cp, sp = np.cos(op * t), np.sin(op * t)
    cm, sm = np.cos(om * t), np.sin(om * t)
    if relative_angles:
        ang_p, ang_m = th - tp, th - tm
    else:
        ang_p, ang_m = tp, tm
    return (cm * cp + sm * sp * np.cos(tp - tm)
            + 1j * cm * sp * np.cos(ang_p) - 1j * sm * cp * np.cos(ang_m))


def decoherence_factor(params: ChainParams, t, sector: str | None = None,
                       relative_angles: bool = True):
    """Exact decoherence factor ``F(t)`` of the chain's ground state.

    ``t`` may be a scalar or an array.  ``sector`` defaults to the ground-state
    sector.  ``relative_angles=False`` evaluates the mode term with the bare
    shifted angles instead of ``theta - theta_pm``; that form is only exact
    when ``theta = 0`` and exists for comparison.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("t must be non-negative")
    if sector is None:
        sector = ground_sector(params)
    if params.g == 0.0:
        out = np.ones(t_arr.shape, dtype=complex)
        return complex(out) if out.ndim == 0 else out
    factors = _mode_factors(params, t_arr, sector, relative_angles)
    prod = np.ones(t_arr.shape, dtype=complex)
    for j in range(factors.shape[-1]):
        prod = prod * factors[..., j]
    out = np.exp(_sector_phase_sign(sector) * 2j * params.g * t_arr) * prod
    return complex(out) if out.ndim == 0 else out


def decoherence_trace(params: ChainParams, t_grid) -> list[DecoherenceSample]:
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0:
        raise ValueError("t_grid must be a non-empty 1-d sequence")
    if t_grid[0] < 0 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing and start at t >= 0")
    f = decoherence_factor(params, t_grid)
    return [DecoherenceSample(t=float(ti), f=complex(fi), abs_f=float(abs(fi)), re_f=float(fi.real))
            for ti, fi in zip(t_grid, f)]


def _mode_norms(params: ChainParams, t, sector: str) -> np.ndarray:
    """Per-mode ``|F_t^k|`` from the alpha-angle product formula."""
    _, _, op, om, th, tp, tm = _spectrum_arrays(params, sector)
    ap, am = th - tp, th - tm
    t = np.asarray(t, dtype=float)[..., None]
    sp, cp = np.sin(t * op), np.cos(t * op)
    sm, cm = np.sin(t * om), np.cos(t * om)
    cross = cm * sp * np.sin(ap) - sm * cp * np.sin(am)
    inner = 1.0 - cross**2 - sp**2 * sm**2 * np.sin(ap - am) ** 2
    return np.sqrt(np.clip(inner, 0.0, None))


def factor_norm_direct(params: ChainParams, t, sector: str | None = None):
    """``|F(t)|`` as a product of per-mode norms written with ``alpha_pm``."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("t must be non-negative")
    if sector is None:
        sector = ground_sector(params)
    out = np.prod(_mode_norms(params, t_arr, sector), axis=-1)
    return float(out) if out.ndim == 0 else out


def cutoff_bound(params: ChainParams, k_c: int, t, sector: str | None = None):
    """Product of the first ``k_c`` mode norms; never below ``|F(t)|``."""
    if not 1 <= k_c <= params.M:
        raise ValueError(f"k_c must lie in 1..{params.M}, got {k_c}")
    if sector is None:
        sector = ground_sector(params)
    norms = _mode_norms(params, t, sector)
    out = np.prod(norms[..., :k_c], axis=-1)
    return float(out) if out.ndim == 0 else out


def cutoff_energy(L: int, k_c: int) -> float:
    return 2.0 * math.pi**2 * k_c * (k_c + 1) * (2 * k_c + 1) / (6.0 * L**2)


def gaussian_rate(params: ChainParams, k_c: int) -> CutoffApprox:
    """Short-time Gaussian decay rate of the cutoff bound near the critical field."""
    if abs(1.0 - params.lam) < _SINGULAR_EPS:
        raise SingularParameterError("decay rate diverges at lam = 1")
    e_kc = cutoff_energy(params.L, k_c)
    r_c = 16.0 * e_kc * params.gamma**2 * params.g**2 / (1.0 - params.lam) ** 2
    return CutoffApprox(k_c=k_c, e_kc=e_kc, r_c=r_c)


def log_bound_approx(params: ChainParams, k_c: int, t):
    """Small-momentum approximation of ``ln`` of the cutoff bound.

    Valid when ``2 pi k_c / L`` is small against ``|1 - lam|``.
    """
    d0 = abs(1.0 - params.lam)
    dp = abs(1.0 - params.lam_plus)
    dm = abs(1.0 - params.lam_minus)
    if min(d0, dp, dm) < _SINGULAR_EPS:
        raise SingularParameterError("approximation diverges when lam or lam +- g equals 1")
    t = np.asarray(t, dtype=float)
    e_kc = cutoff_energy(params.L, k_c)
    pref = e_kc * params.gamma**2 * params.g**2 / (dp**2 * dm**2 * d0**2)
    sp, cp = np.sin(2 * t * dp), np.cos(2 * t * dp)
    sm, cm = np.sin(2 * t * dm), np.cos(2 * t * dm)
    bracket = 4.0 * sp**2 * sm**2 * d0**2 + (cm * sp * dm + sm * cp * dp) ** 2
    out = -pref * bracket
    return float(out) if out.ndim == 0 else out
