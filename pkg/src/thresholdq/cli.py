"""Command-line front end.

Subcommands: analyze (transform + density CSVs), moments (analytic vs
finite-difference mean), simulate (event-driven run), compare (simulation
against the inverted CDF plus a gamma-convergence sweep).

Configuration comes from an optional `key = value` file plus flags that
mirror the keys; flags win. Exit codes: 0 ok, 2 configuration error,
3 numeric failure. Diagnostics go to stderr only.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ThresholdQError
from .inversion import InversionConfig, invert_density, moment
from .model import QueueParams, Regime, validate
from .simulator import SimConfig, dump_samples, empirical_vs_transform, simulate
from .sojourn_continuous import mean_sojourn_continuous, sojourn_lt_continuous
from .sojourn_inspection import mean_sojourn_inspection, sojourn_lt_inspection


class ConfigError(Exception):
    pass


_KEYS = ("lambda", "mu0", "mu1", "gamma", "K", "regime", "s_grid", "t_grid",
         "seed", "customers", "warmup", "replications", "out_dir")

_GAMMA_SWEEP = (0.01, 0.1, 1.0, 10.0, 100.0, 1000.0)


@dataclass(frozen=True)
class RunConfig:
    lam: float
    mu0: float
    mu1: float
    gamma: Optional[float]
    K: int
    regime: Regime
    s_grid: np.ndarray
    t_grid: np.ndarray
    seed: int
    customers: int
    warmup: int
    replications: int
    out_dir: str

    def queue_params(self) -> QueueParams:
        return QueueParams(lam=self.lam, mu0=self.mu0, mu1=self.mu1, K=self.K,
                           regime=self.regime, gamma=self.gamma)


def _parse_grid(spec: str, name: str) -> np.ndarray:
    parts = spec.split(":")
    if len(parts) != 3:
        raise ConfigError(f"{name} must look like start:stop:count, got {spec!r}")
    try:
        start, stop = float(parts[0]), float(parts[1])
        count = int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"cannot parse {name} {spec!r}: {exc}") from exc
    if count < 1:
        raise ConfigError(f"{name} count must be positive")
    if count > 1 and stop <= start:
        raise ConfigError(f"{name} must ascend (stop > start)")
    return np.linspace(start, stop, count)


def _read_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value.strip()
    return values


def _resolve(args: argparse.Namespace) -> RunConfig:
    raw = _read_config_file(args.config) if args.config else {}
    flag_map = {"lambda": args.lam, "mu0": args.mu0, "mu1": args.mu1,
                "gamma": args.gamma, "K": args.K, "regime": args.regime,
                "s_grid": args.s_grid, "t_grid": args.t_grid, "seed": args.seed,
                "customers": args.customers, "warmup": args.warmup,
                "replications": args.replications, "out_dir": args.out_dir}
    for key, val in flag_map.items():
        if val is not None:
            raw[key] = val

    def need(key):
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")
        return raw[key]

    def number(key, conv, val):
        try:
            return conv(val)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {val!r}") from exc

    lam = number("lambda", float, need("lambda"))
    mu0 = number("mu0", float, need("mu0"))
    mu1 = number("mu1", float, need("mu1"))
    K = number("K", int, need("K"))

    gamma_raw = raw.get("gamma")
    gamma: Optional[float]
    if gamma_raw is None or (isinstance(gamma_raw, str) and gamma_raw.lower() == "continuous"):
        gamma = None
    else:
        gamma = number("gamma", float, gamma_raw)

    regime_raw = raw.get("regime")
    if regime_raw is None:
        regime = Regime.CONTINUOUS if gamma is None else Regime.EXPONENTIAL
    else:
        try:
            regime = Regime.coerce(regime_raw)
        except ThresholdQError as exc:
            raise ConfigError(str(exc)) from exc

    cfg = RunConfig(
        lam=lam, mu0=mu0, mu1=mu1, gamma=gamma, K=K, regime=regime,
        s_grid=_parse_grid(str(raw.get("s_grid", "0.1:4.0:40")), "s_grid"),
        t_grid=_parse_grid(str(raw.get("t_grid", "0.1:20.0:100")), "t_grid"),
        seed=number("seed", int, raw.get("seed", 20260819)),
        customers=number("customers", int, raw.get("customers", 100_000)),
        warmup=number("warmup", int, raw.get("warmup", 10_000)),
        replications=number("replications", int, raw.get("replications", 1)),
        out_dir=str(raw.get("out_dir", ".")),
    )
    if cfg.t_grid[0] <= 0:
        raise ConfigError("t_grid must start above 0")
    try:
        validate(cfg.queue_params())
    except ThresholdQError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def _transform(params: QueueParams):
    if params.regime is Regime.CONTINUOUS:
        return lambda s: sojourn_lt_continuous(params, s)
    return lambda s: sojourn_lt_inspection(params, s)


def _analytic_mean(params: QueueParams) -> float:
    if params.regime is Regime.CONTINUOUS:
        return mean_sojourn_continuous(params)
    return mean_sojourn_inspection(params)


def _write_csv(path: str, header: str, rows) -> int:
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        n = 0
        for row in rows:
            fh.write(",".join(f"{x:.12g}" for x in row) + "\n")
            n += 1
    return n


def cmd_analyze(cfg: RunConfig, out=sys.stdout) -> int:
    params = cfg.queue_params()
    psi = _transform(params)
    vals = np.asarray(psi(cfg.s_grid.astype(complex)))
    os.makedirs(cfg.out_dir, exist_ok=True)
    tpath = os.path.join(cfg.out_dir, "transform.csv")
    n = _write_csv(tpath, "s,re_psi,im_psi",
                   ((s, v.real, v.imag) for s, v in zip(cfg.s_grid, vals)))
    print(f"transform.csv: {n} rows", file=out)
    curve = invert_density(psi, cfg.t_grid, InversionConfig())
    dpath = os.path.join(cfg.out_dir, "density.csv")
    n = _write_csv(dpath, "t,f,F", zip(curve.t, curve.f, curve.F))
    print(f"density.csv: {n} rows", file=out)
    if not curve.accuracy_ok:
        print(f"warning: inversion error estimate {curve.est_error:.3g} "
              "above target", file=sys.stderr)
    return 0


def cmd_moments(cfg: RunConfig, out=sys.stdout) -> int:
    params = cfg.queue_params()
    analytic = _analytic_mean(params)
    fd = moment(_transform(params), order=1)
    print(f"regime     {params.regime.value}", file=out)
    print(f"analytic   {analytic:.12g}", file=out)
    print(f"transform  {fd:.12g}", file=out)
    print(f"gap        {abs(analytic - fd):.3g}", file=out)
    return 0


def cmd_simulate(cfg: RunConfig, dump: Optional[str] = None, out=sys.stdout) -> int:
    params = cfg.queue_params()
    result = simulate(SimConfig(params=params, customers=cfg.customers,
                                warmup=cfg.warmup, seed=cfg.seed,
                                replications=cfg.replications))
    half = 1.96 * result.std_error
    print(f"regime        {params.regime.value}", file=out)
    print(f"customers     {cfg.customers * cfg.replications}", file=out)
    print(f"mean          {result.mean:.12g}", file=out)
    print(f"std_error     {result.std_error:.12g}", file=out)
    print(f"ci95          [{result.mean - half:.12g}, {result.mean + half:.12g}]", file=out)
    if dump:
        dump_samples(result, dump)
        print(f"samples       {dump}", file=out)
    return 0


def cmd_compare(cfg: RunConfig, out=sys.stdout) -> int:
    params = cfg.queue_params()
    curve = invert_density(_transform(params), cfg.t_grid, InversionConfig())
    result = simulate(SimConfig(params=params, customers=cfg.customers,
                                warmup=cfg.warmup, seed=cfg.seed,
                                replications=cfg.replications))
    gap = empirical_vs_transform(result, curve)
    print(f"cdf_sup_gap   {gap:.6g}", file=out)

    sweep_regime = params.regime if params.regime is not Regime.CONTINUOUS else Regime.EXPONENTIAL
    cont = QueueParams(lam=params.lam, mu0=params.mu0, mu1=params.mu1,
                       K=params.K, regime=Regime.CONTINUOUS, gamma=None)
    ref = invert_density(_transform(cont), cfg.t_grid, InversionConfig())
    print("gamma_sweep (sup density gap vs continuous)", file=out)
    for g in _GAMMA_SWEEP:
        insp = QueueParams(lam=params.lam, mu0=params.mu0, mu1=params.mu1,
                           K=params.K, regime=sweep_regime, gamma=g)
        sweep = invert_density(_transform(insp), cfg.t_grid, InversionConfig())
        print(f"  {g:<8g} {float(np.max(np.abs(sweep.f - ref.f))):.6g}", file=out)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thresholdq",
        description="Sojourn-time analysis of a threshold service-rate queue")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (("analyze", "write transform.csv and density.csv"),
                           ("moments", "analytic vs transform-differentiated mean"),
                           ("simulate", "discrete-event simulation summary"),
                           ("compare", "simulation vs analytic CDF, gamma sweep")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="key = value configuration file")
        p.add_argument("--lambda", dest="lam", help="arrival rate")
        p.add_argument("--mu0", help="low service rate")
        p.add_argument("--mu1", help="high service rate")
        p.add_argument("--gamma", help="inspection rate, or 'continuous'")
        p.add_argument("--K", help="threshold")
        p.add_argument("--regime", help="continuous | exponential | erlang2")
        p.add_argument("--s_grid", help="start:stop:count for transform evaluation")
        p.add_argument("--t_grid", help="start:stop:count for density evaluation")
        p.add_argument("--seed", help="simulation seed")
        p.add_argument("--customers", help="recorded customers per replication")
        p.add_argument("--warmup", help="discarded departures")
        p.add_argument("--replications", help="independent replications")
        p.add_argument("--out_dir", help="output directory for CSV files")
        if name == "simulate":
            p.add_argument("--dump_samples", help="write one sojourn per line here")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _resolve(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "analyze":
            return cmd_analyze(cfg)
        if args.command == "moments":
            return cmd_moments(cfg)
        if args.command == "simulate":
            return cmd_simulate(cfg, dump=getattr(args, "dump_samples", None))
        return cmd_compare(cfg)
    except (ThresholdQError, np.linalg.LinAlgError, FloatingPointError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
