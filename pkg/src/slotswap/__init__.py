"""slotswap: agent-based simulator of a decentralised time-slot exchange
mechanism for community energy load balancing.

Households swap hourly appliance slots, track pairwise favours (social
capital) and imitate better-performing strategies at the end of each day.
"""

from .demand import (
    CapacityProfile,
    DemandCurve,
    DemandCurveError,
    initial_allocation,
    load_demand_curve,
    resolve_curve,
    sample_requests,
    uniform_capacity,
)
from .engine import (
    AdvertBoard,
    ExchangeOutcome,
    ExchangeRequest,
    Motive,
    build_board,
    decide,
    execute_exchange,
    identify_exchange,
    run_day,
    run_round,
)
from .learning import LearningParams, learn_step, switch_probability
from .metrics import (
    DayStats,
    UTestResult,
    day_stats,
    mann_whitney_u,
    theoretical_optimum,
    unspent_social_capital,
)
from .model import Agent, FavourLedger, SlotToken, Strategy, satisfaction, select_unwanted
from .runner import (
    BatchStats,
    Outcome,
    RunResult,
    SimConfig,
    run_batch,
    run_simulation,
    run_sweep,
    splitmix64,
)

__version__ = "0.1.0"
