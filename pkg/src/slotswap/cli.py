"""Command-line entry point.

Subcommands: run (single simulation), batch (many seeded runs), sweep
(parameter sweep over population / beta / curve_mix), optimum (Monte Carlo
mean of the theoretical optimum), validate (parse and check a config, then
exit). Configuration comes from an INI-style file ([simulation] key = value
plus a [curves] section of id = fraction), with flags applied on top.

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import configparser
import random
import sys
import time
from dataclasses import replace
from pathlib import Path

from .demand import DemandCurveError, resolve_curve, uniform_capacity
from .metrics import theoretical_optimum
from .demand import sample_requests
from .runner import (
    SimConfig,
    config_hash,
    config_lines,
    parse_curve_spec,
    run_batch,
    run_sweep,
    run_simulation,
    splitmix64,
    write_daily_csv,
    write_manifest,
    write_runs_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

_INT_KEYS = {"population", "tradeless_rounds_to_end_day", "tail_days", "max_days", "seed", "runs"}
_FLOAT_KEYS = {"beta", "initial_social_fraction"}


class ConfigError(Exception):
    pass


def load_config_file(path: Path) -> SimConfig:
    if not path.exists():
        raise ConfigError(f"config not found: {path}")
    parser = configparser.ConfigParser()
    try:
        parser.read(path)
    except configparser.Error as e:
        raise ConfigError(f"config parse error in {path}: {e}") from e
    kwargs: dict = {}
    if parser.has_section("simulation"):
        for key, value in parser.items("simulation"):
            if key in _INT_KEYS:
                try:
                    kwargs[key] = int(value)
                except ValueError:
                    raise ConfigError(f"config key '{key}': expected integer, got '{value}'")
            elif key in _FLOAT_KEYS:
                try:
                    kwargs[key] = float(value)
                except ValueError:
                    raise ConfigError(f"config key '{key}': expected number, got '{value}'")
            else:
                raise ConfigError(f"unknown config key '{key}' in [simulation]")
    if parser.has_section("curves"):
        assignment = []
        for cid, frac in parser.items("curves"):
            try:
                assignment.append((cid, float(frac)))
            except ValueError:
                raise ConfigError(f"curve '{cid}': expected fraction, got '{frac}'")
        if assignment:
            kwargs["curve_assignment"] = tuple(assignment)
    return SimConfig(**kwargs)


def apply_overrides(config: SimConfig, args: argparse.Namespace) -> tuple[SimConfig, dict[str, str]]:
    overrides: dict[str, str] = {}
    updates: dict = {}
    for key in ("population", "beta", "seed", "runs", "initial_social_fraction",
                "tail_days", "max_days"):
        value = getattr(args, key, None)
        if value is not None:
            updates[key] = value
            overrides[key] = str(value)
    if getattr(args, "curves", None):
        try:
            updates["curve_assignment"] = parse_curve_spec(args.curves)
        except ValueError as e:
            raise ConfigError(str(e))
        overrides["curves"] = args.curves
    return replace(config, **updates), overrides


def build_config(args: argparse.Namespace) -> tuple[SimConfig, dict[str, str]]:
    config = load_config_file(Path(args.config)) if args.config else SimConfig()
    config, overrides = apply_overrides(config, args)
    try:
        config.validate()
        for cid, _ in config.curve_assignment:
            resolve_curve(cid)
    except (ValueError, DemandCurveError) as e:
        raise ConfigError(str(e))
    return config, overrides


def default_out_dir(config: SimConfig) -> Path:
    stamp = time.strftime("%Y%m%d-%H%M%S")
    return Path("out") / f"{stamp}-{config_hash(config)}"


def _print_batch_summary(stats) -> None:
    print(f"runs:                 {stats.runs}")
    print(f"social takeovers:     {stats.social.count}")
    if stats.social.count:
        print(f"  mean takeover day:  {stats.social.mean_takeover_day:.1f}")
        print(f"  mean takeover sat:  {stats.social.mean_takeover_sat:.4f}")
        print(f"  mean end sat:       {stats.social.mean_end_sat:.4f}")
    print(f"selfish takeovers:    {stats.selfish.count}")
    if stats.selfish.count:
        print(f"  mean takeover day:  {stats.selfish.mean_takeover_day:.1f}")
        print(f"  mean takeover sat:  {stats.selfish.mean_takeover_sat:.4f}")
        print(f"  mean end sat:       {stats.selfish.mean_end_sat:.4f}")
    if stats.not_converged:
        print(f"not converged:        {stats.not_converged}")
    if stats.end_sat_u_test:
        u = stats.end_sat_u_test
        print(f"end-sat U test:       U={u.u_statistic:.1f} p={u.p_value:.3g} ({u.method.value})")


def cmd_run(args: argparse.Namespace) -> int:
    config, overrides = build_config(args)
    out = Path(args.out) if args.out else default_out_dir(config)
    out.mkdir(parents=True, exist_ok=True)
    run_seed = splitmix64(config.seed, 0)
    result = run_simulation(config, run_seed)
    write_daily_csv(out / "daily_000.csv", result.days)
    write_runs_csv(out / "runs.csv", [result])
    curves = {cid: resolve_curve(cid) for cid, _ in config.curve_assignment}
    write_manifest(out / "manifest.txt", config, curves, extra=overrides)
    print(f"outcome: {result.outcome.value}" +
          (f" at day {result.takeover_day}" if result.takeover_day else ""))
    print(f"end satisfaction: {result.satisfaction_at_end:.4f}")
    print(f"unspent social capital mean: {result.unspent_capital_mean:.2f}")
    print(f"artifacts: {out}")
    return EXIT_OK


def cmd_batch(args: argparse.Namespace) -> int:
    config, overrides = build_config(args)
    out = Path(args.out) if args.out else default_out_dir(config)
    out.mkdir(parents=True, exist_ok=True)
    stats, _ = run_batch(config, out_dir=out)
    curves = {cid: resolve_curve(cid) for cid, _ in config.curve_assignment}
    write_manifest(out / "manifest.txt", config, curves, extra=overrides)
    _print_batch_summary(stats)
    print(f"artifacts: {out}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    config, overrides = build_config(args)
    if args.axis == "population":
        values = [int(v) for v in args.values.split(",")]
    elif args.axis == "beta":
        values = [float(v) for v in args.values.split(",")]
    elif args.axis == "curve_mix":
        values = [v for v in args.values.split(";") if v]
        for v in values:
            parse_curve_spec(v)
    else:
        raise ConfigError(f"unknown sweep axis '{args.axis}'")
    if not values:
        raise ConfigError("sweep needs at least one value")
    out = Path(args.out) if args.out else default_out_dir(config)
    out.mkdir(parents=True, exist_ok=True)
    rows = run_sweep(config, args.axis, values, out_dir=out)
    print(f"{args.axis:>12}  social  selfish  mean_takeover_day(social)")
    for label, stats in rows:
        day = f"{stats.social.mean_takeover_day:.0f}" if stats.social.count else "-"
        print(f"{label:>12}  {stats.social.count:6d}  {stats.selfish.count:7d}  {day:>10}")
    print(f"artifacts: {out}")
    return EXIT_OK


def cmd_optimum(args: argparse.Namespace) -> int:
    config, _ = build_config(args)
    curve = resolve_curve(args.curve)
    capacity = uniform_capacity(config.population)
    rng = random.Random(config.seed)
    values = []
    for _ in range(args.samples):
        requests = [sample_requests(curve, rng) for _ in range(config.population)]
        values.append(theoretical_optimum(requests, capacity))
    mean = sum(values) / len(values)
    sd = (sum((v - mean) ** 2 for v in values) / len(values)) ** 0.5
    print(f"mean optimum over {args.samples} draws: {mean:.4f} (sd {sd:.4f})")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    config, overrides = build_config(args)
    print("config ok")
    for line in config_lines(config):
        print(f"  {line}")
    if overrides:
        print("overrides: " + ", ".join(f"{k}={v}" for k, v in overrides.items()))
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI config file")
    p.add_argument("--out", help="output directory (default out/<timestamp>-<confighash>)")
    p.add_argument("--seed", type=int)
    p.add_argument("--population", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--runs", type=int)
    p.add_argument("--initial-social-fraction", type=float, dest="initial_social_fraction")
    p.add_argument("--tail-days", type=int, dest="tail_days")
    p.add_argument("--max-days", type=int, dest="max_days")
    p.add_argument("--curves", help="id:fraction[,id:fraction...]")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slotswap", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("run", cmd_run), ("batch", cmd_batch), ("validate", cmd_validate)):
        p = sub.add_parser(name)
        _add_common(p)
        p.set_defaults(fn=fn)
    p = sub.add_parser("sweep")
    _add_common(p)
    p.add_argument("--axis", required=True, choices=["population", "beta", "curve_mix"])
    p.add_argument("--values", required=True,
                   help="comma-separated values (';'-separated curve specs for curve_mix)")
    p.set_defaults(fn=cmd_sweep)
    p = sub.add_parser("optimum")
    _add_common(p)
    p.add_argument("--curve", default="flat")
    p.add_argument("--samples", type=int, default=100)
    p.set_defaults(fn=cmd_optimum)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, DemandCurveError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
