"""
Time-averaged steering weight maximized over measurement sets, and the sweeps
built on it: power versus field and weight over a (gamma, t) plane.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .chain import ChainParams, decoherence_factor
from .sdp import OPTIMAL
from .steering import build_measurements, default_angles
from .weight import assemblage_stack, ts_weight_batch

__all__ = [
    "PowerConfig",
    "PowerResult",
    "SweepPoint",
    "GammaTimeMap",
    "SolveWarning",
    "DEATH_THRESHOLD",
    "time_grid",
    "sample_angles",
    "weight_grid",
    "ts_weight_power",
    "lambda_sweep",
    "gamma_time_map",
    "death_time",
]

DEATH_THRESHOLD = 1e-4
# Fixed batch size: results never depend on how work is split across workers.
CHUNK = 2048


class SolveWarning(RuntimeWarning):
    """Some SDP solves in a sweep did not reach ``optimal``."""


@dataclass(frozen=True)
class PowerConfig:
    n: int = 2
    t_b: float = 10.0
    t_step: float = 0.1
    samples: int = 200
    seed: int = 0
    tol: float = 1e-8
    max_iter: int = 200

    def __post_init__(self):
        errs = []
        if self.n not in (2, 3):
            errs.append(f"n must be 2 or 3, got {self.n!r}")
        if not (math.isfinite(self.t_b) and self.t_b > 0):
            errs.append(f"t_b must be positive, got {self.t_b!r}")
        if not (math.isfinite(self.t_step) and self.t_step > 0):
            errs.append(f"t_step must be positive, got {self.t_step!r}")
        if int(self.samples) != self.samples or self.samples < 1:
            errs.append(f"samples must be a positive integer, got {self.samples!r}")
        if self.tol < 1e-10:
            errs.append(f"tol must be >= 1e-10, got {self.tol!r}")
        if errs:
            raise ValueError("; ".join(errs))

    def t_grid(self) -> np.ndarray:
        return time_grid(self.t_b, self.t_step)


@dataclass
class PowerResult:
    power: float
    best_angles: tuple[float, float]
    angles: np.ndarray              # (samples, 2)
    averages: np.ndarray            # (samples,), NaN where a solve failed
    failed: int
    t: np.ndarray
    traces: np.ndarray | None = field(default=None, repr=False)


@dataclass
class SweepPoint:
    value: float
    result: PowerResult | None
    error: str | None = None


@dataclass
class GammaTimeMap:
    lam: float
    gammas: np.ndarray
    t: np.ndarray
    weights: np.ndarray             # (len(gammas), len(t))
    ok: np.ndarray                  # same shape, solver reached optimal
    death: np.ndarray               # (len(gammas),), NaN if no sudden death


def time_grid(t_max: float, t_step: float, t_min: float = 0.0) -> np.ndarray:
    """Uniform grid over ``[t_min, t_max]`` with both endpoints and spacing at most ``t_step``."""
    if not t_max > t_min:
        raise ValueError(f"empty time range [{t_min}, {t_max}]")
    if not t_step > 0:
        raise ValueError(f"t_step must be positive, got {t_step}")
    steps = math.ceil((t_max - t_min) / t_step - 1e-9)
    return np.linspace(t_min, t_max, steps + 1)


def sample_angles(samples: int, seed: int) -> np.ndarray:
    """``(samples, 2)`` uniform draws of ``(theta, phi)`` in ``[0, pi)``.

    Rows are drawn in order, so a smaller sample count gives a prefix of a
    larger one with the same seed.
    """
    return np.random.default_rng(seed).uniform(0.0, np.pi, size=(samples, 2))


def _solve_chunk(args):
    entries, tol, max_iter = args
    sols = ts_weight_batch(entries, tol=tol, max_iter=max_iter)
    w = np.array([s.weight for s in sols])
    ok = np.array([s.status == OPTIMAL for s in sols])
    return w, ok


def weight_grid(angles, f_values, n: int, tol: float = 1e-8, max_iter: int = 200,
                workers: int = 1):
    """Weights for every (angle pair, factor) combination.

    Returns ``(W, ok)`` of shape ``(len(angles), len(f_values))``.
    """
    angles = np.atleast_2d(np.asarray(angles, dtype=float))
    f_values = np.asarray(f_values, dtype=complex).reshape(-1)
    S, T = angles.shape[0], f_values.size
    entries = np.concatenate([assemblage_stack(f_values, build_measurements(th, ph, n))
                              for th, ph in angles])
    jobs = [(entries[i:i + CHUNK], tol, max_iter) for i in range(0, S * T, CHUNK)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_solve_chunk, jobs))
    else:
        parts = [_solve_chunk(j) for j in jobs]
    W = np.concatenate([p[0] for p in parts]).reshape(S, T)
    ok = np.concatenate([p[1] for p in parts]).reshape(S, T)
    return W, ok


def ts_weight_power(params: ChainParams, cfg: PowerConfig, *, f_values=None,
                    keep_traces: bool = False, workers: int = 1) -> PowerResult:
    """Largest trapezoid time-average of ``W(t)`` over seeded random measurement sets.

    ``f_values`` overrides the chain's decoherence factor on ``cfg.t_grid()``.
    Samples with any failed solve are dropped from the max and counted.
    """
    t = cfg.t_grid()
    if f_values is None:
        f_values = decoherence_factor(params, t)
    f_values = np.asarray(f_values, dtype=complex)
    if f_values.shape != t.shape:
        raise ValueError(f"need {t.size} factor values, got {f_values.size}")
    angles = sample_angles(cfg.samples, cfg.seed)
    W, ok = weight_grid(angles, f_values, cfg.n, cfg.tol, cfg.max_iter, workers)
    good = ok.all(axis=1)
    averages = np.full(cfg.samples, np.nan)
    averages[good] = np.trapezoid(W[good], t, axis=1) / (t[-1] - t[0])
    failed = int((~good).sum())
    if failed:
        warnings.warn(f"{failed} of {cfg.samples} samples had failed solves and were excluded",
                      SolveWarning, stacklevel=2)
    if not good.any():
        raise ArithmeticError("every sample had a failed SDP solve")
    best = int(np.nanargmax(averages))
    power = float(np.clip(averages[best], 0.0, 1.0))
    return PowerResult(power=power, best_angles=(float(angles[best, 0]), float(angles[best, 1])),
                       angles=angles, averages=averages, failed=failed, t=t,
                       traces=W if keep_traces else None)


def lambda_sweep(params: ChainParams, lams, cfg: PowerConfig, workers: int = 1) -> list[SweepPoint]:
    """Power at each field value; same seed everywhere, failures recorded per point."""
    lams = np.asarray(lams, dtype=float).reshape(-1)
    if lams.size > 1 and not (np.all(np.diff(lams) > 0) or np.all(np.diff(lams) < 0)):
        raise ValueError("lambda grid must be strictly monotone")
    out = []
    for lam in lams:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", SolveWarning)
                res = ts_weight_power(params.replace(lam=float(lam)), cfg, workers=workers)
            out.append(SweepPoint(float(lam), res, None if not res.failed else
                                  f"{res.failed} samples excluded"))
        except (ArithmeticError, ValueError) as exc:
            out.append(SweepPoint(float(lam), None, str(exc)))
    return out


def death_time(t, w, threshold: float = DEATH_THRESHOLD) -> float:
    """Earliest grid time from which ``w`` stays below ``threshold``; NaN if it never does."""
    w = np.asarray(w)
    below = w < threshold
    if not below[-1]:
        return float("nan")
    above = np.flatnonzero(~below)
    start = 0 if above.size == 0 else above[-1] + 1
    return float(t[start])


def gamma_time_map(params: ChainParams, gammas, t, n: int = 2, angles=None,
                   tol: float = 1e-8, max_iter: int = 200, workers: int = 1) -> GammaTimeMap:
    """Weight over a (gamma, t) grid at fixed field, with the sudden-death boundary."""
    gammas = np.asarray(gammas, dtype=float).reshape(-1)
    t = np.asarray(t, dtype=float).reshape(-1)
    for name, grid in (("gamma", gammas), ("t", t)):
        if grid.size > 1 and not np.all(np.diff(grid) > 0):
            raise ValueError(f"{name} grid must be strictly increasing")
    theta, phi = default_angles(n) if angles is None else angles
    f = np.stack([decoherence_factor(params.replace(gamma=float(gm)), t) for gm in gammas])
    W, ok = weight_grid([(theta, phi)], f.reshape(-1), n, tol, max_iter, workers)
    W = W.reshape(gammas.size, t.size)
    ok = ok.reshape(gammas.size, t.size)
    death = np.array([death_time(t, row) for row in W])
    return GammaTimeMap(lam=params.lam, gammas=gammas, t=t, weights=W, ok=ok, death=death)
