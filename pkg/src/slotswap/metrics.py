"""Population statistics: per-day aggregates, the theoretical-optimum bound,
unspent-social-capital accounting and a Mann-Whitney U test.

The theoretical optimum for a day's request draw is the hour-wise min of
request counts and capacity, divided by total requests. Because every agent
requests 4 distinct hours, this equals the maximum bipartite matching between
request slots and tokens: an agent needs at most one token per requested hour
and filler tokens are unconstrained, so hour-level matching decomposes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .demand import CapacityProfile
from .model import HOURS_PER_DAY, SLOTS_PER_AGENT, Agent, Strategy, satisfaction


@dataclass
class StrategyStats:
    count: int
    mean: float  # 0.0 when the strategy has no members
    sd: float  # population SD (divide by count); 0.0 for empty or singleton


@dataclass
class DayStats:
    day: int
    social: StrategyStats
    selfish: StrategyStats
    population_mean: float
    optimum: float
    rounds: int
    exchanges: int
    hit_round_cap: bool = False
    round_accepts: list[int] | None = None  # per-round accept counts, kept when invariant checks are on

    @property
    def population(self) -> int:
        return self.social.count + self.selfish.count


class UMethod(Enum):
    EXACT = "exact"
    NORMAL_APPROX = "normal_approx"


@dataclass
class UTestResult:
    u_statistic: float
    p_value: float
    method: UMethod


def theoretical_optimum(requests: list[frozenset[int]], capacity: CapacityProfile) -> float:
    """Upper bound on achievable mean satisfaction for one day's request draw.

    sum_h min(R_h, capacity[h]) / (4N), R_h = number of agents requesting h.
    """
    n = len(requests)
    counts = [0] * HOURS_PER_DAY
    for req in requests:
        for h in req:
            counts[h] += 1
    covered = sum(min(counts[h], capacity.per_hour[h]) for h in range(HOURS_PER_DAY))
    return covered / (SLOTS_PER_AGENT * n)


def _mean_sd(values: list[float]) -> tuple[float, float]:
    if not values:
        return 0.0, 0.0
    m = sum(values) / len(values)
    var = sum((v - m) ** 2 for v in values) / len(values)
    return m, math.sqrt(var)


def day_stats(
    agents: list[Agent],
    day: int,
    optimum: float,
    rounds: int,
    exchanges: int,
    hit_round_cap: bool = False,
    round_accepts: list[int] | None = None,
) -> DayStats:
    """Aggregate end-of-day satisfactions per strategy and for the population.

    Strategies with zero members report mean 0 and SD 0, matching how runs
    are tabulated after a takeover.
    """
    sats = {Strategy.SOCIAL: [], Strategy.SELFISH: []}
    all_sats: list[float] = []
    for a in agents:
        s = satisfaction(a)
        sats[a.strategy].append(s)
        all_sats.append(s)
    soc_mean, soc_sd = _mean_sd(sats[Strategy.SOCIAL])
    sel_mean, sel_sd = _mean_sd(sats[Strategy.SELFISH])
    pop_mean, _ = _mean_sd(all_sats)
    return DayStats(
        day=day,
        social=StrategyStats(len(sats[Strategy.SOCIAL]), soc_mean, soc_sd),
        selfish=StrategyStats(len(sats[Strategy.SELFISH]), sel_mean, sel_sd),
        population_mean=pop_mean,
        optimum=optimum,
        rounds=rounds,
        exchanges=exchanges,
        hit_round_cap=hit_round_cap,
        round_accepts=round_accepts,
    )


@dataclass
class SocialCapitalReport:
    per_agent_given: list[int]
    per_agent_owed: list[int]
    mean_given: float
    mean_owed: float


def unspent_social_capital(agents: list[Agent]) -> SocialCapitalReport:
    """Unrepaid favours given (credit still callable), per agent and mean.

    The owed side is reported too; for pairs that were social throughout, the
    two totals agree by double entry.
    """
    given = [a.ledger.total_given() for a in agents]
    owed = [a.ledger.total_owed() for a in agents]
    n = max(len(agents), 1)
    return SocialCapitalReport(given, owed, sum(given) / n, sum(owed) / n)


# --- Mann-Whitney U ---------------------------------------------------------

_EXACT_LIMIT = 400  # run the exact null distribution when n1*n2 <= this and no ties


def _rank_with_midranks(pooled: list[float]) -> tuple[list[float], bool]:
    order = sorted(range(len(pooled)), key=lambda i: pooled[i])
    ranks = [0.0] * len(pooled)
    has_ties = False
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and pooled[order[j + 1]] == pooled[order[i]]:
            j += 1
        if j > i:
            has_ties = True
        midrank = (i + j) / 2 + 1  # ranks are 1-based
        for k in range(i, j + 1):
            ranks[order[k]] = midrank
        i = j + 1
    return ranks, has_ties


def _exact_tail_counts(n1: int, n2: int) -> list[int]:
    """count[u] = number of n1-subsets of ranks 1..n1+n2 with U statistic u.

    Standard recurrence on the topmost rank: if it belongs to sample a it
    beats all j b-items (f(i-1, j, u-j)), otherwise it beats none
    (f(i, j-1, u)).
    """
    table: list[list[list[int]]] = [
        [[] for _ in range(n2 + 1)] for _ in range(n1 + 1)
    ]
    for j in range(n2 + 1):
        table[0][j] = [1]
    for i in range(1, n1 + 1):
        table[i][0] = [1]
        for j in range(1, n2 + 1):
            cur = [0] * (i * j + 1)
            prev_a = table[i - 1][j]  # size (i-1)*j + 1
            prev_b = table[i][j - 1]  # size i*(j-1) + 1
            for u in range(i * j + 1):
                c = 0
                if 0 <= u - j < len(prev_a):
                    c += prev_a[u - j]
                if u < len(prev_b):
                    c += prev_b[u]
                cur[u] = c
            table[i][j] = cur
    return table[n1][n2]


def _norm_sf(x: float) -> float:
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def mann_whitney_u(sample_a: list[float], sample_b: list[float]) -> UTestResult:
    """Two-sided Mann-Whitney U test with midranks for ties.

    Uses the exact null distribution when n1*n2 <= 400 and there are no ties,
    otherwise a normal approximation with tie and continuity corrections.
    Returns U for sample_a, so u(a, b) + u(b, a) = n1*n2.
    """
    n1, n2 = len(sample_a), len(sample_b)
    if n1 == 0 or n2 == 0:
        raise ValueError("mann_whitney_u: both samples must be non-empty")
    pooled = list(sample_a) + list(sample_b)
    ranks, has_ties = _rank_with_midranks(pooled)
    rank_sum_a = sum(ranks[:n1])
    u1 = rank_sum_a - n1 * (n1 + 1) / 2
    u2 = n1 * n2 - u1

    if not has_ties and n1 * n2 <= _EXACT_LIMIT:
        counts = _exact_tail_counts(n1, n2)
        total = math.comb(n1 + n2, n1)
        u_small = int(round(min(u1, u2)))
        tail = sum(counts[: u_small + 1])
        p = min(1.0, 2.0 * tail / total)
        return UTestResult(u1, p, UMethod.EXACT)

    n = n1 + n2
    # tie correction on the variance
    tie_sum = 0
    i = 0
    sorted_pool = sorted(pooled)
    while i < n:
        j = i
        while j + 1 < n and sorted_pool[j + 1] == sorted_pool[i]:
            j += 1
        t = j - i + 1
        tie_sum += t**3 - t
        i = j + 1
    var = n1 * n2 / 12.0 * ((n + 1) - tie_sum / (n * (n - 1)))
    if var <= 0:  # all values identical
        return UTestResult(u1, 1.0, UMethod.NORMAL_APPROX)
    mu = n1 * n2 / 2.0
    diff = u1 - mu
    # continuity correction toward the mean
    cc = 0.5 if diff > 0 else (-0.5 if diff < 0 else 0.0)
    z = (diff - cc) / math.sqrt(var)
    p = min(1.0, 2.0 * _norm_sf(abs(z)))
    return UTestResult(u1, p, UMethod.NORMAL_APPROX)
