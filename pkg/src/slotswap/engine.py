"""One simulated day of exchanges: advertising, round-based pairwise requests,
strategy-dependent acceptance, swap execution and social-capital updates.

Each round the advert board lists every agent's unwanted tokens, and agents
are iterated in a fresh random order. An agent that has not yet been targeted
this round and is not fully satisfied issues at most one request for an
advertised token on an hour it is missing. The targeted owner is locked for
the rest of the round (it receives at most one request and its remaining
adverts come off the table), decides immediately, and an accepted swap
executes on the spot. The day ends after 10 consecutive rounds without an
accepted exchange (hard cap 500 rounds as a safety net).

Requesters browse the board anonymously: adverts are indexed by hour and the
owner's identity plays no part in choosing beyond skipping self-owned and
locked-owner adverts, which the board applies as structural filters.

The board is maintained incrementally: tokens that move in an exchange come
off immediately, tokens that become unwanted through an exchange are queued
and only listed from the next round on, which is exactly what rebuilding the
board at every round start would produce.
"""

from __future__ import annotations

import random
from enum import Enum
from typing import NamedTuple

from .demand import CapacityProfile, DemandCurve, initial_allocation, sample_requests
from .metrics import DayStats, day_stats, theoretical_optimum
from .model import (
    HOURS_PER_DAY,
    SLOTS_PER_AGENT,
    Agent,
    SlotToken,
    Strategy,
    record_favour_given,
    record_favour_owed,
    satisfaction,
    select_unwanted,
)

TRADELESS_ROUNDS_TO_END_DAY = 10
ROUND_HARD_CAP = 500


class Motive(Enum):
    MUTUAL_BENEFIT = "mutual_benefit"
    FAVOUR_REPAYMENT = "favour_repayment"
    REJECTED = "rejected"


class Advert(NamedTuple):
    owner_id: int
    token: SlotToken


class AdvertBoard:
    """Anonymous listing of unwanted tokens, indexed by hour.

    `locked` holds owners that were targeted this round. Retired tokens leave
    their bucket immediately; queued additions join at the next round start.
    """

    __slots__ = ("by_hour", "locked", "_token_hour", "_pending")

    def __init__(self):
        self.by_hour: list[list[Advert]] = [[] for _ in range(HOURS_PER_DAY)]
        self.locked: set[int] = set()
        self._token_hour: dict[int, int] = {}
        self._pending: list[Advert] = []

    def add(self, owner_id: int, token: SlotToken) -> None:
        self.by_hour[token.hour].append(Advert(owner_id, token))
        self._token_hour[token.token_id] = token.hour

    def queue_add(self, owner_id: int, token: SlotToken) -> None:
        self._pending.append(Advert(owner_id, token))

    def retire_token(self, token_id: int) -> None:
        hour = self._token_hour.pop(token_id, None)
        if hour is None:
            return
        bucket = self.by_hour[hour]
        for i, advert in enumerate(bucket):
            if advert.token.token_id == token_id:
                bucket.pop(i)
                break

    def new_round(self) -> None:
        self.locked.clear()
        if self._pending:
            for advert in self._pending:
                self.add(advert.owner_id, advert.token)
            self._pending.clear()

    def all_adverts(self) -> list[Advert]:
        return [a for bucket in self.by_hour for a in bucket]

    def live_count(self) -> int:
        return len(self._token_hour)


class ExchangeRequest(NamedTuple):
    requester_id: int
    target_id: int
    desired: SlotToken
    offered_pool: tuple[SlotToken, ...]  # the requester's unwanted tokens


class ExchangeOutcome(NamedTuple):
    accepted: bool
    returned: SlotToken | None
    motive: Motive


REJECTED_OUTCOME = ExchangeOutcome(False, None, Motive.REJECTED)


class RoundReport(NamedTuple):
    accepted_count: int
    requests_made: int


def build_board(agents: list[Agent]) -> AdvertBoard:
    """List every agent's unwanted tokens, in agent-id then token-id order."""
    board = AdvertBoard()
    for agent in sorted(agents, key=lambda a: a.id):
        for tok in select_unwanted(agent):
            board.add(agent.id, tok)
    return board


def _candidate_adverts(board: AdvertBoard, agent_id: int, uncovered: set[int]) -> list[Advert]:
    by_hour = board.by_hour
    hours = [h for h in uncovered if by_hour[h]]
    if not hours:
        return []
    if len(hours) > 1:
        hours.sort()
    locked = board.locked
    out: list[Advert] = []
    for h in hours:
        for advert in by_hour[h]:
            owner = advert.owner_id
            if owner != agent_id and owner not in locked:
                out.append(advert)
    return out


def identify_exchange(
    agent: Agent,
    board: AdvertBoard,
    rng: random.Random,
    uncovered: set[int] | None = None,
    unwanted: list[SlotToken] | None = None,
) -> ExchangeRequest | None:
    """Pick one live advert, uniformly at random, among those offering an hour
    the agent requested but does not cover. Returns None when nothing matches.
    """
    if uncovered is None:
        uncovered = set(agent.uncovered_hours())
    candidates = _candidate_adverts(board, agent.id, uncovered)
    if not candidates:
        return None
    advert = candidates[rng.randrange(len(candidates))]
    pool = tuple(select_unwanted(agent) if unwanted is None else unwanted)
    return ExchangeRequest(agent.id, advert.owner_id, advert.token, pool)


def decide(
    receiver: Agent,
    request: ExchangeRequest,
    rng: random.Random,
    uncovered: set[int] | None = None,
) -> ExchangeOutcome:
    """Accept or refuse a request according to the receiver's strategy.

    Mutual benefit (an offered token covers an hour the receiver is missing)
    is accepted by both strategies, returning the lowest-id such token. A
    social receiver that owes the requester a favour additionally accepts
    with a uniformly random offered token; giving up the desired token cannot
    hurt it since that token was unwanted. Anything else is refused.
    """
    if uncovered is None:
        uncovered = receiver.uncovered_hours()
    wanted = [t for t in request.offered_pool if t.hour in uncovered]
    if wanted:
        returned = min(wanted, key=lambda t: t.token_id)
        return ExchangeOutcome(True, returned, Motive.MUTUAL_BENEFIT)
    if receiver.strategy is Strategy.SOCIAL and receiver.ledger.owed(request.requester_id) > 0:
        if not request.offered_pool:
            return REJECTED_OUTCOME
        returned = request.offered_pool[rng.randrange(len(request.offered_pool))]
        return ExchangeOutcome(True, returned, Motive.FAVOUR_REPAYMENT)
    return REJECTED_OUTCOME


def execute_exchange(
    requester: Agent,
    receiver: Agent,
    request: ExchangeRequest,
    outcome: ExchangeOutcome,
) -> bool:
    """Swap the two tokens and update both ledgers. Returns False (no changes)
    if either token is no longer held - a stale-board abort that cannot occur
    under the per-round locking rule, kept as a guard.
    """
    assert outcome.accepted and outcome.returned is not None
    desired, returned = request.desired, outcome.returned
    if desired not in receiver.held or returned not in requester.held:
        return False
    receiver.held.remove(desired)
    requester.held.remove(returned)
    requester.held.append(desired)
    receiver.held.append(returned)
    record_favour_owed(requester, receiver.id)
    record_favour_given(receiver, requester.id)
    if outcome.motive is Motive.FAVOUR_REPAYMENT:
        receiver.ledger.repay_owed(requester.id)
        if requester.is_social():
            requester.ledger.mark_given_repaid(receiver.id)
    return True


class _DayState:
    """Per-day cache of derived agent state, kept in lockstep with holdings."""

    __slots__ = ("uncovered", "unwanted")

    def __init__(self, agents: list[Agent]):
        self.uncovered: dict[int, set[int]] = {}
        self.unwanted: dict[int, list[SlotToken]] = {}
        for a in agents:
            self.refresh(a)

    def refresh(self, agent: Agent) -> None:
        self.uncovered[agent.id] = set(agent.uncovered_hours())
        self.unwanted[agent.id] = select_unwanted(agent)


def _apply_exchange_to_board(
    board: AdvertBoard,
    state: _DayState,
    agent: Agent,
    receiver: Agent,
) -> None:
    """Re-derive the two touched agents' unwanted sets and patch the board:
    tokens no longer unwanted are retired, newly unwanted ones (the receiver's
    side of a favour repayment) are queued for the next round."""
    for party in (agent, receiver):
        old = state.unwanted[party.id]
        new = select_unwanted(party)
        old_ids = {t.token_id for t in old}
        new_ids = {t.token_id for t in new}
        for tok in old:
            if tok.token_id not in new_ids:
                board.retire_token(tok.token_id)
        for tok in new:
            if tok.token_id not in old_ids:
                board.queue_add(party.id, tok)
        state.unwanted[party.id] = new


def run_round(
    agents: list[Agent],
    rng: random.Random,
    state: _DayState | None = None,
    checks: "InvariantChecker | None" = None,
    board: AdvertBoard | None = None,
) -> RoundReport:
    """Run one exchange round over all agents. `agents` must be indexable by
    agent id (agents[i].id == i)."""
    if state is None:
        state = _DayState(agents)
    if board is None:
        board = build_board(agents)
    accepted = 0
    requests = 0
    uncovered_of = state.uncovered
    unwanted_of = state.unwanted
    order = [i for i in range(len(agents)) if uncovered_of[i]]
    rng.shuffle(order)
    locked = board.locked
    for i in order:
        if i in locked:
            continue
        uncovered = uncovered_of[i]
        if not uncovered:
            continue
        agent = agents[i]
        request = identify_exchange(agent, board, rng, uncovered, unwanted_of[i])
        if request is None:
            continue
        requests += 1
        target = request.target_id
        locked.add(target)
        receiver = agents[target]
        outcome = decide(receiver, request, rng, uncovered_of[target])
        if not outcome.accepted:
            continue
        if checks is not None:
            checks.before_exchange(agent, receiver)
        if not execute_exchange(agent, receiver, request, outcome):
            continue
        accepted += 1
        returned = outcome.returned
        assert returned is not None
        uncovered.discard(request.desired.hour)
        if outcome.motive is Motive.MUTUAL_BENEFIT:
            uncovered_of[target].discard(returned.hour)
        _apply_exchange_to_board(board, state, agent, receiver)
        if checks is not None:
            checks.after_exchange(agent, receiver, outcome)
    if checks is not None:
        checks.after_round(agents, state, board)
    return RoundReport(accepted, requests)


class InvariantChecker:
    """Asserts the engine's per-exchange and per-round invariants; used by the
    test suite, off in normal runs."""

    def __init__(self, capacity: CapacityProfile):
        self.capacity = capacity
        self._pre: tuple[float, float] | None = None
        self._last_mean: float | None = None

    def start_day(self) -> None:
        self._last_mean = None

    def before_exchange(self, requester: Agent, receiver: Agent) -> None:
        self._pre = (satisfaction(requester), satisfaction(receiver))

    def after_exchange(self, requester: Agent, receiver: Agent, outcome: ExchangeOutcome) -> None:
        assert self._pre is not None
        req_gain = satisfaction(requester) - self._pre[0]
        rec_gain = satisfaction(receiver) - self._pre[1]
        assert abs(req_gain - 0.25) < 1e-12, f"requester gain {req_gain} != +0.25"
        assert rec_gain in (0.0, 0.25), f"receiver gain {rec_gain} not in {{0, +0.25}}"
        if outcome.motive is Motive.FAVOUR_REPAYMENT:
            assert rec_gain == 0.0

    def after_round(self, agents: list[Agent], state: _DayState, board: AdvertBoard) -> None:
        counts = [0] * HOURS_PER_DAY
        for a in agents:
            assert len(a.held) == SLOTS_PER_AGENT
            for t in a.held:
                counts[t.hour] += 1
        assert tuple(counts) == self.capacity.per_hour, "token conservation violated"
        mean = sum(satisfaction(a) for a in agents) / len(agents)
        if self._last_mean is not None:
            assert mean >= self._last_mean - 1e-12, "mean satisfaction decreased within a day"
        self._last_mean = mean
        expected_adverts = set()
        for a in agents:  # cached state matches the pure recompute
            assert state.uncovered[a.id] == a.uncovered_hours()
            assert state.unwanted[a.id] == select_unwanted(a)
            expected_adverts.update((a.id, t.token_id) for t in state.unwanted[a.id])
        # board live entries plus queued additions equal the unwanted union
        listed = {(adv.owner_id, adv.token.token_id) for adv in board.all_adverts()}
        listed |= {(adv.owner_id, adv.token.token_id) for adv in board._pending}
        assert listed == expected_adverts, "board out of sync with unwanted sets"


def run_day(
    agents: list[Agent],
    capacity: CapacityProfile,
    curves: dict[str, DemandCurve],
    rng: random.Random,
    day: int = 1,
    tradeless_rounds_to_end_day: int = TRADELESS_ROUNDS_TO_END_DAY,
    round_hard_cap: int = ROUND_HARD_CAP,
    checks: InvariantChecker | None = None,
) -> DayStats:
    """Run one full day: resample requests, deal tokens, exchange until the
    tradeless-round limit, and aggregate day-end statistics (pre-learning)."""
    for agent in agents:
        agent.requested = sample_requests(curves[agent.demand_curve_id], rng)
    optimum = theoretical_optimum([a.requested for a in agents], capacity)
    initial_allocation(agents, capacity, rng)
    if checks is not None:
        checks.start_day()
    state = _DayState(agents)
    board = build_board(agents)
    zero_streak = 0
    rounds = 0
    exchanges = 0
    round_accepts: list[int] = []
    while zero_streak < tradeless_rounds_to_end_day and rounds < round_hard_cap:
        if rounds:
            board.new_round()
        report = run_round(agents, rng, state, checks, board)
        rounds += 1
        exchanges += report.accepted_count
        round_accepts.append(report.accepted_count)
        zero_streak = zero_streak + 1 if report.accepted_count == 0 else 0
    return day_stats(
        agents,
        day,
        optimum,
        rounds,
        exchanges,
        hit_round_cap=rounds >= round_hard_cap and zero_streak < tradeless_rounds_to_end_day,
        round_accepts=round_accepts if checks is not None else None,
    )
