import random

from hypothesis import given
from hypothesis import strategies as st

from slotswap.model import (
    Agent,
    FavourLedger,
    SlotToken,
    Strategy,
    record_favour_given,
    record_favour_owed,
    satisfaction,
    select_unwanted,
)

from conftest import make_agent


class TestSatisfaction:
    def test_full_match(self):
        assert satisfaction(make_agent(held_hours=(1, 2, 3, 4))) == 1.0

    def test_disjoint(self):
        assert satisfaction(make_agent(held_hours=(5, 6, 7, 8))) == 0.0

    def test_duplicate_counts_once(self):
        # hours 1 and 2 covered, the duplicate 1 does not count twice
        assert satisfaction(make_agent(held_hours=(1, 1, 2, 9))) == 0.5

    @given(
        requested=st.sets(st.integers(0, 23), min_size=4, max_size=4),
        held=st.lists(st.integers(0, 23), min_size=4, max_size=4),
    )
    def test_quantised_to_quarters(self, requested, held):
        agent = make_agent(requested=tuple(requested), held_hours=tuple(held))
        s = satisfaction(agent)
        assert 0.0 <= s <= 1.0
        assert s * 4 == int(s * 4)


class TestSelectUnwanted:
    def test_fully_satisfied_advertises_nothing(self):
        assert select_unwanted(make_agent(held_hours=(1, 2, 3, 4))) == []

    def test_unrequested_hours_returned(self):
        agent = make_agent(held_hours=(1, 2, 8, 9))
        assert [t.hour for t in select_unwanted(agent)] == [8, 9]

    def test_duplicate_keeps_lowest_token_id(self):
        # two hour-1 tokens with ids 0 and 1: id 0 is kept, id 1 returned
        agent = make_agent(held_hours=(1, 1, 2, 3))
        unwanted = select_unwanted(agent)
        assert len(unwanted) == 1
        assert unwanted[0] == SlotToken(1, 1)

    def test_duplicate_keeps_lowest_regardless_of_position(self):
        agent = Agent(
            id=0,
            strategy=Strategy.SOCIAL,
            requested=frozenset({1, 2, 3, 4}),
            held=[SlotToken(1, 7), SlotToken(1, 3), SlotToken(2, 1), SlotToken(3, 2)],
        )
        assert select_unwanted(agent) == [SlotToken(1, 7)]

    @given(
        requested=st.sets(st.integers(0, 23), min_size=4, max_size=4),
        held=st.lists(st.integers(0, 23), min_size=4, max_size=4),
    )
    def test_partition_of_held(self, requested, held):
        # unwanted plus kept tokens re-form held exactly; no overlap
        agent = make_agent(requested=tuple(requested), held_hours=tuple(held))
        unwanted = select_unwanted(agent)
        kept = [t for t in agent.held if t not in unwanted]
        assert sorted(kept + unwanted) == sorted(agent.held)
        covered = {t.hour for t in kept}
        assert covered == agent.covered_hours()
        for t in kept:
            assert t.hour in agent.requested
        # each requested hour keeps at most one token
        assert len(covered) == len(kept)


class TestFavourLedger:
    def test_social_pair_single_increment(self):
        requester = make_agent(0, Strategy.SOCIAL)
        acceptor = make_agent(1, Strategy.SOCIAL)
        record_favour_owed(requester, acceptor.id)
        record_favour_given(acceptor, requester.id)
        assert requester.ledger.owed_to == {1: 1}
        assert acceptor.ledger.given_to == {0: 1}

    def test_selfish_requester_records_nothing(self):
        requester = make_agent(0, Strategy.SELFISH)
        acceptor = make_agent(1, Strategy.SOCIAL)
        record_favour_owed(requester, acceptor.id)
        record_favour_given(acceptor, requester.id)
        assert requester.ledger.owed_to == {}
        assert acceptor.ledger.given_to == {0: 1}

    def test_repay_decrements(self):
        ledger = FavourLedger(owed_to={5: 2})
        ledger.repay_owed(5)
        assert ledger.owed_to[5] == 1

    def test_counts_never_negative(self):
        ledger = FavourLedger()
        ledger.repay_owed(3)
        ledger.mark_given_repaid(3)
        assert all(v >= 0 for v in ledger.owed_to.values())
        assert all(v >= 0 for v in ledger.given_to.values())

    def test_double_entry_for_social_pairs(self):
        rng = random.Random(1)
        agents = [make_agent(i, Strategy.SOCIAL) for i in range(5)]
        for _ in range(200):
            q, r = rng.sample(range(5), 2)
            record_favour_owed(agents[q], r)
            record_favour_given(agents[r], q)
        for a in agents:
            for b in agents:
                if a.id != b.id:
                    assert a.ledger.owed_to.get(b.id, 0) == b.ledger.given_to.get(a.id, 0)
