"""Domain types for the time-slot exchange: agents, slot tokens, favour ledgers.

A slot token is one unit of hourly energy capacity. Every agent requests 4
distinct hours per day and holds exactly 4 tokens between exchanges. The
favour ledger is each agent's private, pairwise record of social capital:
``owed_to[b]`` counts unrepaid favours this agent owes agent ``b`` (b accepted
this agent's requests), ``given_to[b]`` counts unrepaid favours this agent has
given b by accepting b's requests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

HOURS_PER_DAY = 24
SLOTS_PER_AGENT = 4


class Strategy(Enum):
    SELFISH = "selfish"
    SOCIAL = "social"


class SlotToken(NamedTuple):
    """One unit of energy capacity at a specific hour.

    token_id is unique across all tokens in existence on a given day; the
    multiset of token hours is fixed at day start and conserved through
    exchanges.
    """

    hour: int
    token_id: int


@dataclass
class FavourLedger:
    """Pairwise favour counts, kept privately by one agent.

    Counts never go negative. Double-entry (a.owed_to[b] == b.given_to[a])
    holds for pairs where both parties used the social strategy for their
    whole shared history; selfish parties simply stop writing, so each ledger
    stays consistent with the events its owner recorded.
    """

    owed_to: dict[int, int] = field(default_factory=dict)
    given_to: dict[int, int] = field(default_factory=dict)

    def record_owed(self, acceptor_id: int) -> None:
        self.owed_to[acceptor_id] = self.owed_to.get(acceptor_id, 0) + 1

    def record_given(self, requester_id: int) -> None:
        self.given_to[requester_id] = self.given_to.get(requester_id, 0) + 1

    def repay_owed(self, creditor_id: int) -> None:
        n = self.owed_to.get(creditor_id, 0)
        if n > 0:
            self.owed_to[creditor_id] = n - 1

    def mark_given_repaid(self, debtor_id: int) -> None:
        n = self.given_to.get(debtor_id, 0)
        if n > 0:
            self.given_to[debtor_id] = n - 1

    def owed(self, agent_id: int) -> int:
        return self.owed_to.get(agent_id, 0)

    def total_given(self) -> int:
        return sum(self.given_to.values())

    def total_owed(self) -> int:
        return sum(self.owed_to.values())


@dataclass
class Agent:
    """One household agent.

    `requested` always holds exactly 4 distinct hours; `held` holds exactly 4
    tokens at day start, day end and between exchange executions. Holding two
    tokens of the same hour is possible under random dealing; duplicates
    beyond the first on a requested hour count as unwanted.
    """

    id: int
    strategy: Strategy
    requested: frozenset[int] = frozenset()
    held: list[SlotToken] = field(default_factory=list)
    ledger: FavourLedger = field(default_factory=FavourLedger)
    demand_curve_id: str = "flat"

    def is_social(self) -> bool:
        return self.strategy is Strategy.SOCIAL

    def covered_hours(self) -> set[int]:
        """Requested hours covered by at least one held token."""
        return {t.hour for t in self.held} & self.requested

    def uncovered_hours(self) -> set[int]:
        return self.requested - {t.hour for t in self.held}


def satisfaction(agent: Agent) -> float:
    """Fraction of the agent's 4 requested hours covered by held tokens.

    Duplicate tokens on one requested hour count once, so the result is a
    multiple of 0.25 in [0, 1].
    """
    return len(agent.covered_hours()) / SLOTS_PER_AGENT


def select_unwanted(agent: Agent) -> list[SlotToken]:
    """Tokens the agent would advertise: hours it did not request, plus
    duplicates beyond the first on a requested hour.

    For a duplicated requested hour the token with the lowest token_id is
    kept. Output is sorted by token_id for determinism.
    """
    kept: dict[int, SlotToken] = {}
    out: list[SlotToken] = []
    for tok in sorted(agent.held, key=lambda t: t.token_id):
        if tok.hour in agent.requested and tok.hour not in kept:
            kept[tok.hour] = tok
        else:
            out.append(tok)
    return out


def record_favour_given(acceptor: Agent, requester_id: int) -> None:
    """Acceptor records one favour given, iff it follows the social strategy."""
    if acceptor.is_social():
        acceptor.ledger.record_given(requester_id)


def record_favour_owed(requester: Agent, acceptor_id: int) -> None:
    """Requester records one favour received (owed back), iff social."""
    if requester.is_social():
        requester.ledger.record_owed(acceptor_id)
