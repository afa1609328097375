import pytest

from slotswap.model import Agent, SlotToken, Strategy


def make_agent(
    agent_id=0,
    strategy=Strategy.SOCIAL,
    requested=(1, 2, 3, 4),
    held_hours=(1, 2, 3, 4),
    first_token_id=0,
):
    """Agent with tokens numbered sequentially from first_token_id."""
    return Agent(
        id=agent_id,
        strategy=strategy,
        requested=frozenset(requested),
        held=[SlotToken(h, first_token_id + i) for i, h in enumerate(held_hours)],
    )


@pytest.fixture
def agent_factory():
    return make_agent
