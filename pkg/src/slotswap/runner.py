"""Full-simulation and batch orchestration.

A run repeats {exchange day, record stats, learning step, extinction check}
until one strategy holds the whole population, then continues for a fixed
tail (default 100 days) so performance can be read off a settled population.
Batches derive per-run seeds as splitmix64(seed, run_index), so results are
reproducible run by run and adding runs never perturbs earlier ones.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

from .demand import CapacityProfile, DemandCurve, resolve_curve, uniform_capacity
from .engine import InvariantChecker, run_day
from .learning import LearningParams, learn_step
from .metrics import DayStats, UTestResult, mann_whitney_u, unspent_social_capital
from .model import Agent, Strategy

ARTIFACT_VERSION = "1"


class Outcome(Enum):
    SOCIAL_TAKEOVER = "social_takeover"
    SELFISH_TAKEOVER = "selfish_takeover"
    NOT_CONVERGED = "not_converged"


@dataclass(frozen=True)
class SimConfig:
    population: int = 96
    curve_assignment: tuple[tuple[str, float], ...] = (("flat", 1.0),)
    beta: float = 1.0
    initial_social_fraction: float = 0.5
    tradeless_rounds_to_end_day: int = 10
    tail_days: int = 100
    max_days: int = 10_000
    seed: int = 0
    runs: int = 100

    def validate(self) -> None:
        if self.population <= 0:
            raise ValueError(f"population must be positive, got {self.population}")
        if self.beta <= 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if not 0.0 <= self.initial_social_fraction <= 1.0:
            raise ValueError(
                f"initial_social_fraction must be in [0, 1], got {self.initial_social_fraction}"
            )
        if self.tradeless_rounds_to_end_day <= 0:
            raise ValueError("tradeless_rounds_to_end_day must be positive")
        if self.tail_days < 0 or self.max_days <= 0 or self.runs <= 0:
            raise ValueError("tail_days must be >= 0; max_days and runs must be positive")
        if not self.curve_assignment:
            raise ValueError("curve_assignment must name at least one curve")
        total = sum(f for _, f in self.curve_assignment)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"curve fractions must sum to 1, got {total}")
        for cid, f in self.curve_assignment:
            if f < 0:
                raise ValueError(f"curve '{cid}': negative fraction {f}")


@dataclass
class RunResult:
    seed: int
    days: list[DayStats]
    outcome: Outcome
    takeover_day: int | None
    satisfaction_at_takeover: float | None
    satisfaction_at_end: float
    unspent_capital_mean: float


@dataclass
class OutcomeStats:
    count: int
    mean_takeover_day: float | None
    mean_takeover_sat: float | None
    mean_end_sat: float | None


@dataclass
class BatchStats:
    runs: int
    social: OutcomeStats
    selfish: OutcomeStats
    not_converged: int
    end_sat_u_test: UTestResult | None  # social vs selfish end satisfactions


def splitmix64(seed: int, index: int) -> int:
    """Fixed 64-bit mix used to derive one run's seed from (seed, run index)."""
    z = (seed + 0x9E3779B97F4A7C15 * (index + 1)) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return z ^ (z >> 31)


def curve_counts(assignment: tuple[tuple[str, float], ...], population: int) -> list[tuple[str, int]]:
    """Agents per curve by largest-remainder rounding of fraction * N."""
    raw = [(cid, frac * population) for cid, frac in assignment]
    counts = [(cid, int(x)) for cid, x in raw]
    short = population - sum(c for _, c in counts)
    remainders = sorted(
        range(len(raw)), key=lambda i: (-(raw[i][1] - int(raw[i][1])), i)
    )
    out = list(counts)
    for i in remainders[:short]:
        out[i] = (out[i][0], out[i][1] + 1)
    return out


def _make_agents(config: SimConfig, rng: random.Random) -> list[Agent]:
    n = config.population
    n_social = math.ceil(config.initial_social_fraction * n - 1e-9)
    strategies = [Strategy.SOCIAL] * n_social + [Strategy.SELFISH] * (n - n_social)
    rng.shuffle(strategies)
    curve_ids: list[str] = []
    for cid, count in curve_counts(config.curve_assignment, n):
        curve_ids.extend([cid] * count)
    rng.shuffle(curve_ids)
    return [
        Agent(id=i, strategy=strategies[i], demand_curve_id=curve_ids[i]) for i in range(n)
    ]


def _single_strategy(agents: list[Agent]) -> Strategy | None:
    first = agents[0].strategy
    return first if all(a.strategy is first for a in agents) else None


def run_simulation(
    config: SimConfig,
    run_seed: int,
    curves: dict[str, DemandCurve] | None = None,
    capacity: CapacityProfile | None = None,
    checks: bool = False,
) -> RunResult:
    """One deterministic simulation run: day loop, takeover detection and the
    post-takeover tail. Fully determined by (config, run_seed)."""
    config.validate()
    if curves is None:
        curves = {cid: resolve_curve(cid) for cid, _ in config.curve_assignment}
    if capacity is None:
        capacity = uniform_capacity(config.population)
    rng = random.Random(run_seed)
    agents = _make_agents(config, rng)
    params = LearningParams(config.beta)
    checker = InvariantChecker(capacity) if checks else None

    days: list[DayStats] = []
    takeover_day: int | None = None
    takeover_sat: float | None = None
    outcome = Outcome.NOT_CONVERGED
    tail_left: int | None = None
    for day in range(1, config.max_days + 1):
        stats = run_day(
            agents,
            capacity,
            curves,
            rng,
            day=day,
            tradeless_rounds_to_end_day=config.tradeless_rounds_to_end_day,
            checks=checker,
        )
        days.append(stats)
        learn_step(agents, params, rng)
        if tail_left is None:
            winner = _single_strategy(agents)
            if winner is not None:
                takeover_day = day
                takeover_sat = stats.population_mean
                outcome = (
                    Outcome.SOCIAL_TAKEOVER
                    if winner is Strategy.SOCIAL
                    else Outcome.SELFISH_TAKEOVER
                )
                tail_left = config.tail_days
        else:
            tail_left -= 1
        if tail_left == 0:
            break
    capital = unspent_social_capital(agents)
    return RunResult(
        seed=run_seed,
        days=days,
        outcome=outcome,
        takeover_day=takeover_day,
        satisfaction_at_takeover=takeover_sat,
        satisfaction_at_end=days[-1].population_mean,
        unspent_capital_mean=capital.mean_given,
    )


def _mean(values: list[float]) -> float | None:
    return sum(values) / len(values) if values else None


def summarize_batch(results: list[RunResult]) -> BatchStats:
    """Aggregate per-run outcomes; order-insensitive."""
    soc = [r for r in results if r.outcome is Outcome.SOCIAL_TAKEOVER]
    sel = [r for r in results if r.outcome is Outcome.SELFISH_TAKEOVER]
    nc = sum(1 for r in results if r.outcome is Outcome.NOT_CONVERGED)
    u_test = None
    if soc and sel:
        u_test = mann_whitney_u(
            [r.satisfaction_at_end for r in soc], [r.satisfaction_at_end for r in sel]
        )
    def _stats(rs: list[RunResult]) -> OutcomeStats:
        return OutcomeStats(
            count=len(rs),
            mean_takeover_day=_mean([float(r.takeover_day) for r in rs if r.takeover_day]),
            mean_takeover_sat=_mean(
                [r.satisfaction_at_takeover for r in rs if r.satisfaction_at_takeover is not None]
            ),
            mean_end_sat=_mean([r.satisfaction_at_end for r in rs]),
        )
    return BatchStats(len(results), _stats(soc), _stats(sel), nc, u_test)


def run_batch(
    config: SimConfig,
    curves: dict[str, DemandCurve] | None = None,
    out_dir: Path | None = None,
    checks: bool = False,
    keep_days: bool = False,
) -> tuple[BatchStats, list[RunResult]]:
    """Execute config.runs independent runs with seeds splitmix64(seed, i).

    When out_dir is given, writes daily_<run>.csv per run, runs.csv,
    batch.csv and manifest.txt. Day series are dropped from the returned
    results unless keep_days is set (they are still written to disk).
    """
    config.validate()
    if curves is None:
        curves = {cid: resolve_curve(cid) for cid, _ in config.curve_assignment}
    capacity = uniform_capacity(config.population)
    results: list[RunResult] = []
    for i in range(config.runs):
        run_seed = splitmix64(config.seed, i)
        result = run_simulation(config, run_seed, curves, capacity, checks=checks)
        if out_dir is not None:
            write_daily_csv(out_dir / f"daily_{i:03d}.csv", result.days)
        if not keep_days and out_dir is not None:
            result.days = []
        results.append(result)
    stats = summarize_batch(results)
    if out_dir is not None:
        write_runs_csv(out_dir / "runs.csv", results)
        write_batch_csv(out_dir / "batch.csv", [("batch", stats)])
        write_manifest(out_dir / "manifest.txt", config, curves)
    return stats, results


SweepAxis = ("population", "beta", "curve_mix")


def parse_curve_spec(spec: str) -> tuple[tuple[str, float], ...]:
    """Parse 'id:fraction[,id:fraction...]' into a curve assignment."""
    out = []
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" not in part:
            raise ValueError(f"bad curve spec '{part}': expected id:fraction")
        cid, frac = part.rsplit(":", 1)
        out.append((cid.strip(), float(frac)))
    if not out:
        raise ValueError("empty curve spec")
    return tuple(out)


def sweep_config(base: SimConfig, axis: str, value) -> SimConfig:
    if axis == "population":
        return replace(base, population=int(value))
    if axis == "beta":
        return replace(base, beta=float(value))
    if axis == "curve_mix":
        assignment = parse_curve_spec(value) if isinstance(value, str) else tuple(value)
        return replace(base, curve_assignment=assignment)
    raise ValueError(f"unknown sweep axis '{axis}' (expected one of {SweepAxis})")


def run_sweep(
    base_config: SimConfig,
    axis: str,
    values: list,
    out_dir: Path | None = None,
    checks: bool = False,
) -> list[tuple[str, BatchStats]]:
    """One batch per axis value, capacity rescaled linearly with population.

    Writes per-value artifacts under <out>/<axis>_<value>/ plus a sweep.csv
    aggregate mirroring the batch columns.
    """
    if not values:
        raise ValueError("sweep needs at least one value")
    configs = [(str(v), sweep_config(base_config, axis, v)) for v in values]
    rows: list[tuple[str, BatchStats]] = []
    for label, cfg in configs:
        sub = out_dir / f"{axis}_{label.replace(':', '-').replace(',', '_')}" if out_dir else None
        if sub is not None:
            sub.mkdir(parents=True, exist_ok=True)
        stats, _ = run_batch(cfg, out_dir=sub, checks=checks)
        rows.append((label, stats))
    if out_dir is not None:
        write_batch_csv(out_dir / "sweep.csv", rows, label_name=axis)
        curves = {}
        for _, cfg in configs:
            for cid, _f in cfg.curve_assignment:
                curves.setdefault(cid, resolve_curve(cid))
        write_manifest(out_dir / "manifest.txt", base_config, curves, extra={"axis": axis, "values": ",".join(str(v) for v in values)})
    return rows


# --- persistence -------------------------------------------------------------

DAILY_HEADER = (
    "day,social_count,selfish_count,social_mean,social_sd,selfish_mean,selfish_sd,"
    "population_mean,optimum,rounds,exchanges"
)
RUNS_HEADER = "seed,outcome,takeover_day,sat_at_takeover,sat_at_end,unspent_capital_mean"


def _f(x: float | None) -> str:
    return "" if x is None else f"{x:.6f}"


def write_daily_csv(path: Path, days: list[DayStats]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [DAILY_HEADER]
    for d in days:
        lines.append(
            f"{d.day},{d.social.count},{d.selfish.count},{_f(d.social.mean)},{_f(d.social.sd)},"
            f"{_f(d.selfish.mean)},{_f(d.selfish.sd)},{_f(d.population_mean)},{_f(d.optimum)},"
            f"{d.rounds},{d.exchanges}"
        )
    path.write_text("\n".join(lines) + "\n")


def write_runs_csv(path: Path, results: list[RunResult]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [RUNS_HEADER]
    for r in results:
        lines.append(
            f"{r.seed},{r.outcome.value},{r.takeover_day if r.takeover_day is not None else ''},"
            f"{_f(r.satisfaction_at_takeover)},{_f(r.satisfaction_at_end)},{_f(r.unspent_capital_mean)}"
        )
    path.write_text("\n".join(lines) + "\n")


BATCH_HEADER = (
    "runs,social_takeovers,social_mean_takeover_day,social_mean_takeover_sat,social_mean_end_sat,"
    "selfish_takeovers,selfish_mean_takeover_day,selfish_mean_takeover_sat,selfish_mean_end_sat,"
    "not_converged,u_statistic,p_value"
)


def write_batch_csv(path: Path, rows: list[tuple[str, BatchStats]], label_name: str = "label") -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{label_name},{BATCH_HEADER}"]
    for label, s in rows:
        u = s.end_sat_u_test
        lines.append(
            f"{label},{s.runs},{s.social.count},{_f(s.social.mean_takeover_day)},"
            f"{_f(s.social.mean_takeover_sat)},{_f(s.social.mean_end_sat)},"
            f"{s.selfish.count},{_f(s.selfish.mean_takeover_day)},{_f(s.selfish.mean_takeover_sat)},"
            f"{_f(s.selfish.mean_end_sat)},{s.not_converged},"
            f"{_f(u.u_statistic) if u else ''},{_f(u.p_value) if u else ''}"
        )
    path.write_text("\n".join(lines) + "\n")


def config_lines(config: SimConfig) -> list[str]:
    return [
        f"population = {config.population}",
        f"curves = {','.join(f'{cid}:{frac}' for cid, frac in config.curve_assignment)}",
        f"beta = {config.beta}",
        f"initial_social_fraction = {config.initial_social_fraction}",
        f"tradeless_rounds_to_end_day = {config.tradeless_rounds_to_end_day}",
        f"tail_days = {config.tail_days}",
        f"max_days = {config.max_days}",
        f"seed = {config.seed}",
        f"runs = {config.runs}",
    ]


def config_hash(config: SimConfig) -> str:
    return hashlib.sha256("\n".join(config_lines(config)).encode()).hexdigest()[:12]


def write_manifest(
    path: Path,
    config: SimConfig,
    curves: dict[str, DemandCurve],
    extra: dict[str, str] | None = None,
) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"artifact_version = {ARTIFACT_VERSION}", "seed_rule = splitmix64(seed, run_index)"]
    lines += config_lines(config)
    for cid in sorted(curves):
        digest = hashlib.sha256(
            ",".join(f"{w:.12g}" for w in curves[cid].raw_weights).encode()
        ).hexdigest()[:16]
        lines.append(f"curve_hash_{cid} = {digest}")
    for k, v in (extra or {}).items():
        lines.append(f"{k} = {v}")
    path.write_text("\n".join(lines) + "\n")
