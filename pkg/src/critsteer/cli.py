"""
Command-line entry point.  One subcommand per scenario, each writing a CSV whose
``#`` header holds the full configuration, so rerunning with ``--config`` on
the CSV itself reproduces it byte for byte.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import io
import os
import sys
import warnings

import numpy as np

from . import __version__
from .chain import FACTOR_CONVENTION, SingularParameterError, decoherence_factor
from .config import SCENARIOS, ConfigError, ExperimentConfig, parse_config, serialize_config, sweep_values
from .oracle import DegenerateGroundStateWarning, oracle_factor
from .power import PowerConfig, gamma_time_map, lambda_sweep, time_grid
from .sdp import OPTIMAL
from .steering import build_measurements, default_angles, s_max, ts_parameter_numeric
from .weight import assemblage_stack, ts_weight_batch

__all__ = ["main", "run_scenario", "config_text_from_csv", "WORKERS_ENV"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
WORKERS_ENV = "CRITSTEER_WORKERS"
AUDIT_TOL = 1e-8

_OVERRIDES = [
    # flag, field, help
    ("--lambda", "lam", "transverse field"),
    ("--gamma", "gamma", "anisotropy"),
    ("--g", "g", "qubit-chain coupling"),
    ("--chain-size", "L", "number of spins (odd)"),
    ("--n-meas", "n", "measurement directions (2 or 3)"),
    ("--t-max", "t_max", "end of the time grid"),
    ("--t-step", "t_step", "time grid spacing"),
    ("--samples", "samples", "random measurement sets for power"),
    ("--seed", "seed", "RNG seed for power"),
    ("--tol", "tol", "SDP gap tolerance"),
]


def _g17(x) -> str:
    return format(float(x), ".17g")


def config_text_from_csv(text: str) -> str:
    """Config embedded in the ``#`` header of an emitted CSV (the ``[meta]`` block dropped)."""
    body, section = [], None
    for raw in text.splitlines():
        if not raw.startswith("#"):
            break
        line = raw[1:].strip()
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1]
        if section == "meta":
            continue
        body.append(line)
    return "\n".join(body)


def _header(cfg: ExperimentConfig) -> str:
    lines = ["[meta]", f"version = {__version__}", f"factor_convention = {FACTOR_CONVENTION}", ""]
    lines += serialize_config(cfg, include_output=False).splitlines()
    return "".join(f"# {ln}\n" if ln else "#\n" for ln in lines)


def _angles(cfg: ExperimentConfig, n: int):
    if cfg.theta is None:
        return default_angles(n)
    return cfg.theta, cfg.phi


def _t_grid(cfg):
    return time_grid(cfg.t_max, cfg.t_step, cfg.t_min)


def _run_factor(cfg, workers):
    t = _t_grid(cfg)
    f = decoherence_factor(cfg.chain, t)
    bad = bool((np.abs(f) > 1 + 1e-12).any())
    rows = [(ti, fi.real, fi.imag, abs(fi)) for ti, fi in zip(t, f)]
    return ["t", "re_f", "im_f", "abs_f"], rows, bad


def _run_ts_param(cfg, workers):
    t = _t_grid(cfg)
    f = decoherence_factor(cfg.chain, t)
    theta, phi = _angles(cfg, 2)
    m2, m3 = build_measurements(theta, phi, 2), build_measurements(theta, phi, 3)
    rows = []
    for ti, fi in zip(t, f):
        rows.append((ti, ts_parameter_numeric(fi, m2), ts_parameter_numeric(fi, m3),
                     s_max(2, fi.real), s_max(3, fi.real)))
    return ["t", "s2", "s3", "s2_max", "s3_max"], rows, False


def _run_weight(cfg, workers):
    t = _t_grid(cfg)
    f = decoherence_factor(cfg.chain, t)
    theta, phi = _angles(cfg, cfg.n)
    sols = ts_weight_batch(assemblage_stack(f, build_measurements(theta, phi, cfg.n)),
                           tol=cfg.tol, max_iter=cfg.max_iter)
    rows = [(ti, s.weight, s.gap, s.status) for ti, s in zip(t, sols)]
    bad = any(s.status != OPTIMAL for s in sols)
    return ["t", "w", "gap", "status"], rows, bad


def _power_cfg(cfg):
    return PowerConfig(n=cfg.n, t_b=cfg.t_b, t_step=cfg.t_step, samples=cfg.samples,
                       seed=cfg.seed, tol=cfg.tol, max_iter=cfg.max_iter)


def _run_power(cfg, workers):
    values = sweep_values(cfg)
    pcfg = _power_cfg(cfg)
    name = cfg.sweep_parameter
    rows, bad = [], False
    if name == "lambda":
        points = lambda_sweep(cfg.chain, values, pcfg, workers=workers)
    else:
        points = []
        for gm in values:
            points.extend(lambda_sweep(cfg.chain.replace(gamma=float(gm)), [cfg.chain.lam], pcfg,
                                       workers=workers))
            points[-1].value = float(gm)
    for p in points:
        if p.result is None:
            rows.append((p.value, float("nan"), float("nan"), float("nan")))
            bad = True
        else:
            bad |= p.result.failed > 0
            rows.append((p.value, p.result.power, *p.result.best_angles))
    return [name, "power", "best_theta", "best_phi"], rows, bad


def _run_phase_map(cfg, workers):
    gammas = sweep_values(cfg)
    t = _t_grid(cfg)
    angles = None if cfg.theta is None else (cfg.theta, cfg.phi)
    gm = gamma_time_map(cfg.chain, gammas, t, n=cfg.n, angles=angles, tol=cfg.tol,
                        max_iter=cfg.max_iter, workers=workers)
    rows = []
    for i, g in enumerate(gammas):
        for j, ti in enumerate(t):
            rows.append((g, ti, gm.weights[i, j], OPTIMAL if gm.ok[i, j] else "max-iterations",
                         gm.death[i]))
    return ["gamma", "t", "w", "status", "death_t"], rows, bool((~gm.ok).any())


def _run_oracle_audit(cfg, workers):
    t = _t_grid(cfg)
    closed = decoherence_factor(cfg.chain, t)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegenerateGroundStateWarning)
        exact = np.atleast_1d(oracle_factor(cfg.chain, t))
    if caught:
        print(f"warning: {caught[0].message}", file=sys.stderr)
    diff = np.abs(closed - exact)
    rows = [(ti, c.real, c.imag, o.real, o.imag, d) for ti, c, o, d in zip(t, closed, exact, diff)]
    return (["t", "closed_form_re", "closed_form_im", "oracle_re", "oracle_im", "abs_diff"], rows,
            bool(diff.max() > AUDIT_TOL))


_RUNNERS = {
    "factor": _run_factor,
    "ts-param": _run_ts_param,
    "weight": _run_weight,
    "power": _run_power,
    "phase-map": _run_phase_map,
    "oracle-audit": _run_oracle_audit,
}


def _cell(v) -> str:
    if isinstance(v, str):
        return v
    return _g17(v)


def run_scenario(cfg: ExperimentConfig, out=None, workers: int = 1) -> int:
    """Run ``cfg`` and write the CSV to ``out`` (path, file object, or ``cfg.output``/stdout)."""
    target = out if out is not None else cfg.output
    status = EXIT_OK
    columns, rows = [], []
    try:
        columns, rows, bad = _RUNNERS[cfg.scenario](cfg, workers)
        if bad:
            status = EXIT_NUMERIC
    except (SingularParameterError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        status = EXIT_NUMERIC
    buf = io.StringIO()
    buf.write(_header(cfg))
    if columns:
        buf.write(",".join(columns) + "\n")
        for r in rows:
            buf.write(",".join(_cell(v) for v in r) + "\n")
    try:
        if target is None or target == "-":
            sys.stdout.write(buf.getvalue())
        elif hasattr(target, "write"):
            target.write(buf.getvalue())
        else:
            with open(target, "w", newline="") as fh:
                fh.write(buf.getvalue())
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return status


def _default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="critsteer",
                                     description="Temporal steering of a qubit dephased by an XY chain.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="scenario", required=True)
    for name in SCENARIOS:
        p = sub.add_parser(name, help=f"run the {name} scenario")
        p.add_argument("--config", help="config file, or a CSV emitted by an earlier run")
        p.add_argument("--out", help="output CSV path (default: config output.path or stdout)")
        p.add_argument("--workers", type=int, default=None,
                       help=f"worker processes (default: ${WORKERS_ENV} or CPU count)")
        for flag, _, help_text in _OVERRIDES:
            p.add_argument(flag, dest=flag.lstrip("-").replace("-", "_"), default=None, help=help_text)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    text = ""
    if args.config:
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            print(f"cannot read config: {exc}", file=sys.stderr)
            return EXIT_IO
        if text.lstrip().startswith("#"):
            text = config_text_from_csv(text)
    overrides = {field: getattr(args, flag.lstrip("-").replace("-", "_")) for flag, field, _ in _OVERRIDES}
    overrides["scenario"] = args.scenario
    try:
        cfg = parse_config(text, overrides)
    except ConfigError as exc:
        print(f"config error:\n{exc}", file=sys.stderr)
        return EXIT_CONFIG
    workers = args.workers if args.workers is not None else _default_workers()
    return run_scenario(cfg, out=args.out, workers=max(1, workers))


if __name__ == "__main__":
    sys.exit(main())
