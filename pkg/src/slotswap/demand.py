"""Demand curves, request sampling and the initial random token allocation.

A demand curve is 24 non-negative weights giving the relative probability an
agent requests each hour. Curves ship as plain CSV files (header
``hour,weight``, 24 data rows); the curve id is the file stem. The bundled
curves are illustrative stand-ins shaped like the demographics they are named
after, not real survey data.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .model import HOURS_PER_DAY, SLOTS_PER_AGENT, Agent, SlotToken

BUILTIN_CURVES = ("flat", "switchable", "single_pensioner", "single_non_pensioner")


class DemandCurveError(ValueError):
    """Raised for malformed demand-curve input."""


@dataclass(frozen=True)
class DemandCurve:
    id: str
    weights: tuple[float, ...]  # normalised, sums to 1
    raw_weights: tuple[float, ...]  # as loaded, echoed in output metadata

    def positive_hours(self) -> int:
        return sum(1 for w in self.weights if w > 0)


@dataclass(frozen=True)
class CapacityProfile:
    """Tokens available per hour. Total always equals 4 x population."""

    per_hour: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.per_hour)


def uniform_capacity(population: int) -> CapacityProfile:
    """Linearly scaled uniform capacity: 4N tokens spread evenly over 24 hours.

    When 4N is not divisible by 24 the remainder goes one extra token to the
    lowest hour indices, so capacity stays deterministic for any population.
    """
    total = SLOTS_PER_AGENT * population
    base, rem = divmod(total, HOURS_PER_DAY)
    return CapacityProfile(tuple(base + (1 if h < rem else 0) for h in range(HOURS_PER_DAY)))


def make_curve(curve_id: str, raw_weights: list[float]) -> DemandCurve:
    if len(raw_weights) != HOURS_PER_DAY:
        raise DemandCurveError(f"curve '{curve_id}': expected 24 hours, got {len(raw_weights)}")
    for h, w in enumerate(raw_weights):
        if w < 0:
            raise DemandCurveError(f"curve '{curve_id}': negative weight {w} at hour {h}")
    total = sum(raw_weights)
    if total <= 0:
        raise DemandCurveError(f"curve '{curve_id}': all weights are zero")
    return DemandCurve(curve_id, tuple(w / total for w in raw_weights), tuple(raw_weights))


def load_demand_curve(source: str | Path) -> DemandCurve:
    """Load a curve from a CSV file with header ``hour,weight`` and 24 rows.

    Rejects wrong row counts, duplicate or out-of-range hours, negative
    weights and all-zero weights, naming the offending row.
    """
    path = Path(source)
    curve_id = path.stem
    weights: list[float | None] = [None] * HOURS_PER_DAY
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header[:2]] != ["hour", "weight"]:
            raise DemandCurveError(f"curve '{curve_id}': expected header 'hour,weight', got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 2:
                raise DemandCurveError(f"curve '{curve_id}' line {lineno}: expected 'hour,weight'")
            try:
                hour = int(row[0])
                weight = float(row[1])
            except ValueError as e:
                raise DemandCurveError(f"curve '{curve_id}' line {lineno}: {e}") from e
            if not 0 <= hour < HOURS_PER_DAY:
                raise DemandCurveError(f"curve '{curve_id}' line {lineno}: hour {hour} out of range 0..23")
            if weights[hour] is not None:
                raise DemandCurveError(f"curve '{curve_id}' line {lineno}: duplicate hour {hour}")
            weights[hour] = weight
    missing = [h for h, w in enumerate(weights) if w is None]
    if missing:
        raise DemandCurveError(
            f"curve '{curve_id}': expected 24 hours, missing {len(missing)} (first missing hour {missing[0]})"
        )
    return make_curve(curve_id, [w for w in weights if w is not None])


def builtin_curve_path(curve_id: str) -> Path:
    ref = resources.files("slotswap") / "curves" / f"{curve_id}.csv"
    return Path(str(ref))


def resolve_curve(curve_id: str) -> DemandCurve:
    """Resolve a curve id to a bundled curve, or treat it as a file path."""
    if curve_id in BUILTIN_CURVES:
        return load_demand_curve(builtin_curve_path(curve_id))
    if Path(curve_id).exists():
        return load_demand_curve(curve_id)
    raise DemandCurveError(
        f"unknown curve '{curve_id}': not one of {', '.join(BUILTIN_CURVES)} and no such file"
    )


def sample_requests(curve: DemandCurve, rng: random.Random) -> frozenset[int]:
    """Draw 4 distinct hours by weighted sampling without replacement.

    Each draw removes the chosen hour and renormalises, so a flat curve gives
    uniform 4-subsets of the day.
    """
    if curve.positive_hours() < SLOTS_PER_AGENT:
        raise DemandCurveError(
            f"curve '{curve.id}': needs at least {SLOTS_PER_AGENT} hours with positive weight"
        )
    weights = list(curve.weights)
    remaining = sum(weights)
    picked: list[int] = []
    for _ in range(SLOTS_PER_AGENT):
        r = rng.random() * remaining
        acc = 0.0
        chosen = -1
        for h in range(HOURS_PER_DAY):
            w = weights[h]
            if w <= 0:
                continue
            acc += w
            if r < acc:
                chosen = h
                break
        if chosen < 0:  # float round-off on the last bucket
            chosen = max(h for h in range(HOURS_PER_DAY) if weights[h] > 0)
        picked.append(chosen)
        remaining -= weights[chosen]
        weights[chosen] = 0.0
    return frozenset(picked)


def build_token_pool(capacity: CapacityProfile) -> list[SlotToken]:
    """All tokens for one day, ids assigned sequentially by hour."""
    pool: list[SlotToken] = []
    tid = 0
    for h, n in enumerate(capacity.per_hour):
        for _ in range(n):
            pool.append(SlotToken(h, tid))
            tid += 1
    return pool


def initial_allocation(agents: list[Agent], capacity: CapacityProfile, rng: random.Random) -> None:
    """Shuffle the day's token pool uniformly and deal 4 per agent in id order."""
    if capacity.total != SLOTS_PER_AGENT * len(agents):
        raise ValueError(
            f"capacity {capacity.total} does not match 4 x {len(agents)} agents"
        )
    pool = build_token_pool(capacity)
    rng.shuffle(pool)
    for i, agent in enumerate(sorted(agents, key=lambda a: a.id)):
        agent.held = pool[SLOTS_PER_AGENT * i : SLOTS_PER_AGENT * (i + 1)]
