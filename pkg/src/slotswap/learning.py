"""End-of-day payoff-biased strategy imitation.

Each agent observes one uniformly random other agent; if the observed agent
ended the day more satisfied, the observer copies its strategy with
probability 2 / (1 + exp(-beta * diff)) - 1. Updates are synchronous: all
observations use the pre-step strategies and satisfactions, then every switch
is applied at once. Ledgers are never touched; an agent that turns selfish
keeps its accumulated social capital.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .model import Agent, satisfaction


@dataclass(frozen=True)
class LearningParams:
    beta: float = 1.0  # selection pressure, > 0

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")


def switch_probability(observer_sat: float, observed_sat: float, params: LearningParams) -> float:
    """Probability of copying a better-performing agent's strategy.

    2 * (1 / (1 + exp(-beta * (observed - observer)))) - 1; zero at equal
    satisfaction and approaching 1 as beta * diff grows.
    """
    diff = observed_sat - observer_sat
    return 2.0 / (1.0 + math.exp(-params.beta * diff)) - 1.0


@dataclass
class LearnReport:
    switches: int  # observers whose strategy actually changed


def learn_step(agents: list[Agent], params: LearningParams, rng: random.Random) -> LearnReport:
    """Apply one synchronous imitation step over all agents.

    Observation targets are drawn uniformly excluding self (one draw per
    agent, in agent order); the copy probability is only drawn when the
    observed satisfaction is strictly greater.
    """
    n = len(agents)
    if n < 2:
        return LearnReport(0)
    snapshot_strategy = [a.strategy for a in agents]
    snapshot_sat = [satisfaction(a) for a in agents]
    switches = 0
    for i, agent in enumerate(agents):
        j = rng.randrange(n - 1)
        if j >= i:
            j += 1
        if snapshot_sat[j] > snapshot_sat[i]:
            p = switch_probability(snapshot_sat[i], snapshot_sat[j], params)
            if rng.random() < p and snapshot_strategy[j] is not snapshot_strategy[i]:
                agent.strategy = snapshot_strategy[j]
                switches += 1
    return LearnReport(switches)
