"""
Experiment configuration: a small ``key = value`` format with ``[section]``
headers, validated in one pass so every problem is reported with its line.

Example::

    [chain]
    L = 1501
    gamma = 1.0
    lambda = 1.0
    g = 0.01

    [scenario]
    kind = weight

    [grid]
    t_max = 5
    t_step = 0.05
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .chain import ChainParams
from .oracle import MAX_ORACLE_L

__all__ = [
    "SCENARIOS",
    "ConfigError",
    "ExperimentConfig",
    "parse_config",
    "serialize_config",
    "sweep_values",
]

SCENARIOS = ("factor", "ts-param", "weight", "power", "phase-map", "oracle-audit")
SWEEP_PARAMETERS = ("lambda", "gamma")


class ConfigError(ValueError):
    """All validation problems of one config text; ``errors`` holds ``(line, message)``."""

    def __init__(self, errors):
        self.errors = list(errors)
        lines = [f"line {ln}: {msg}" if ln else msg for ln, msg in self.errors]
        super().__init__("\n".join(lines))


@dataclass(frozen=True)
class ExperimentConfig:
    chain: ChainParams
    scenario: str
    t_min: float = 0.0
    t_max: float = 5.0
    t_step: float = 0.05
    n: int = 2
    theta: float | None = None      # None: default axes for n
    phi: float | None = None
    t_b: float = 10.0
    samples: int = 200
    seed: int = 0
    sweep: str | None = None        # None: lambda for power, gamma for phase-map
    sweep_start: float | None = None
    sweep_stop: float | None = None
    sweep_step: float | None = None
    tol: float = 1e-8
    max_iter: int = 200
    output: str | None = None

    @property
    def sweep_parameter(self) -> str:
        if self.sweep is not None:
            return self.sweep
        return "gamma" if self.scenario == "phase-map" else "lambda"

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)


def _float(s):
    v = float(s)
    if not math.isfinite(v):
        raise ValueError(f"{s!r} is not finite")
    return v


def _int(s):
    try:
        return int(s)
    except ValueError:
        v = float(s)
        if v != int(v):
            raise ValueError(f"{s!r} is not an integer") from None
        return int(v)


def _angle(s):
    return None if s.strip().lower() == "default" else _float(s)


def _choice(options):
    def conv(s):
        if s not in options:
            raise ValueError(f"{s!r} is not one of {', '.join(options)}")
        return s
    return conv


def _text(s):
    return s


# section -> key -> (field name, converter)
_SCHEMA = {
    "chain": {"L": ("L", _int), "gamma": ("gamma", _float), "lambda": ("lam", _float),
              "g": ("g", _float)},
    "scenario": {"kind": ("scenario", _choice(SCENARIOS))},
    "grid": {"t_min": ("t_min", _float), "t_max": ("t_max", _float), "t_step": ("t_step", _float)},
    "measurement": {"n": ("n", _int), "theta": ("theta", _angle), "phi": ("phi", _angle)},
    "power": {"t_b": ("t_b", _float), "samples": ("samples", _int), "seed": ("seed", _int)},
    "sweep": {"parameter": ("sweep", _choice(SWEEP_PARAMETERS)), "start": ("sweep_start", _float),
              "stop": ("sweep_stop", _float), "step": ("sweep_step", _float)},
    "solver": {"tol": ("tol", _float), "max_iter": ("max_iter", _int)},
    "output": {"path": ("output", _text)},
}
_LOCATION = {name: (sec, key) for sec, keys in _SCHEMA.items() for key, (name, _) in keys.items()}
_REQUIRED = ("L", "gamma", "lam", "g", "scenario")


def parse_config(text: str, overrides: dict | None = None) -> ExperimentConfig:
    """Parse and validate; raises :class:`ConfigError` listing every problem.

    ``overrides`` maps field names (``lam``, ``L``, ``samples``, ...) to raw
    string or numeric values applied on top of the text.
    """
    errors = []
    values, where = {}, {}
    section = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip() if not raw.lstrip().startswith("#") else ""
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                errors.append((ln, f"unknown section [{section}]"))
            continue
        if "=" not in line:
            errors.append((ln, f"expected 'key = value', got {line!r}"))
            continue
        key, val = (p.strip() for p in line.split("=", 1))
        if section is None:
            errors.append((ln, f"key {key!r} outside any section"))
            continue
        if section not in _SCHEMA:
            continue
        if key not in _SCHEMA[section]:
            errors.append((ln, f"unknown key {key!r} in [{section}]"))
            continue
        name, conv = _SCHEMA[section][key]
        if name in where:
            errors.append((ln, f"duplicate key {key!r} in [{section}]"))
            continue
        where[name] = ln
        try:
            values[name] = conv(val)
        except ValueError as exc:
            errors.append((ln, f"{section}.{key}: {exc}"))

    for name, val in (overrides or {}).items():
        if val is None:
            continue
        if name not in _LOCATION:
            errors.append((0, f"unknown override {name!r}"))
            continue
        sec, key = _LOCATION[name]
        conv = _SCHEMA[sec][key][1]
        where[name] = 0
        try:
            values[name] = conv(val) if isinstance(val, str) else val
        except ValueError as exc:
            errors.append((0, f"override {sec}.{key}: {exc}"))

    for name in _REQUIRED:
        if name not in where:
            sec, key = _LOCATION[name]
            errors.append((0, f"missing required {sec}.{key}"))

    def err(name, msg):
        errors.append((where.get(name, 0), msg))

    chain = None
    n_before = len(errors)
    if "L" in values and (values["L"] < 3 or values["L"] % 2 == 0):
        err("L", f"chain.L must be odd and >= 3, got {values['L']}")
    if "gamma" in values and not 0.0 <= values["gamma"] <= 1.0:
        err("gamma", f"chain.gamma must lie in [0, 1], got {values['gamma']}")
    if "g" in values and values["g"] < 0:
        err("g", f"chain.g must be non-negative, got {values['g']}")
    if len(errors) == n_before and all(k in values for k in ("L", "gamma", "lam", "g")):
        chain = ChainParams(L=values["L"], gamma=values["gamma"], lam=values["lam"], g=values["g"])

    kw = {k: v for k, v in values.items() if k not in ("L", "gamma", "lam", "g")}
    kw.setdefault("scenario", "")
    probe = ExperimentConfig(chain=chain, **kw)

    if not probe.t_min >= 0:
        err("t_min", "grid.t_min must be >= 0")
    if not probe.t_max > probe.t_min:
        err("t_max", "grid.t_max must exceed grid.t_min")
    if not probe.t_step > 0:
        err("t_step", "grid.t_step must be positive")
    if probe.n not in (2, 3):
        err("n", f"measurement.n must be 2 or 3, got {probe.n}")
    if (probe.theta is None) != (probe.phi is None):
        err("theta" if probe.theta is None else "phi",
            "measurement.theta and measurement.phi must both be numbers or both 'default'")
    if not probe.t_b > 0:
        err("t_b", "power.t_b must be positive")
    if probe.samples < 1:
        err("samples", "power.samples must be >= 1")
    if probe.seed < 0:
        err("seed", "power.seed must be >= 0")
    if not probe.tol >= 1e-10:
        err("tol", "solver.tol must be >= 1e-10")
    if probe.max_iter < 1:
        err("max_iter", "solver.max_iter must be >= 1")
    if probe.scenario in ("power", "phase-map"):
        for name in ("sweep_start", "sweep_stop", "sweep_step"):
            if getattr(probe, name) is None:
                err(name, f"scenario {probe.scenario} needs sweep.{_LOCATION[name][1]}")
        if probe.sweep_step is not None and not probe.sweep_step > 0:
            err("sweep_step", "sweep.step must be positive")
        if (probe.sweep_start is not None and probe.sweep_stop is not None
                and not probe.sweep_stop >= probe.sweep_start):
            err("sweep_stop", "sweep.stop must be >= sweep.start")
        if probe.scenario == "phase-map" and probe.sweep_parameter != "gamma":
            err("sweep", "phase-map sweeps gamma")
        if probe.sweep_parameter == "gamma" and probe.sweep_start is not None:
            lo, hi = probe.sweep_start, probe.sweep_stop if probe.sweep_stop is not None else 0.0
            if lo < 0 or hi > 1:
                err("sweep_start", "gamma sweep must stay inside [0, 1]")
    if probe.scenario == "oracle-audit" and chain is not None and chain.L > MAX_ORACLE_L:
        err("L", f"oracle-audit needs L <= {MAX_ORACLE_L}, got {chain.L}")
    if errors:
        raise ConfigError(sorted(errors))
    return probe


def _fmt(v):
    if v is None:
        return "default"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def serialize_config(cfg: ExperimentConfig, include_output: bool = True) -> str:
    """Text that :func:`parse_config` turns back into ``cfg``."""
    c = cfg.chain
    chain_vals = {"L": c.L, "gamma": c.gamma, "lam": c.lam, "g": c.g}
    lines = []
    for sec, keys in _SCHEMA.items():
        body = []
        for key, (name, _) in keys.items():
            v = chain_vals[name] if sec == "chain" else getattr(cfg, name)
            if v is None and name not in ("theta", "phi"):
                continue
            if name == "output" and not include_output:
                continue
            body.append(f"{key} = {_fmt(v)}")
        if body:
            lines.append(f"[{sec}]")
            lines.extend(body)
            lines.append("")
    return "\n".join(lines)


def sweep_values(cfg: ExperimentConfig):
    """Inclusive sweep grid with spacing at most ``sweep_step``."""
    start, stop, step = cfg.sweep_start, cfg.sweep_stop, cfg.sweep_step
    if stop == start:
        return np.array([start])
    count = math.ceil((stop - start) / step - 1e-9)
    return np.linspace(start, stop, count + 1)
