"""Delayed-block arbitrage: bribery economics, fork-choice simulation and DTOA search."""

from .amm import LiquidityPool, MarketState, PoolError, TokenGraph, build_graph, swap_out
from .bribery import (
    BribeProposer,
    BribeValidators,
    BriberyScenario,
    Honest,
    bribery_cost_proposer,
    bribery_cost_validators,
    min_validator_fee,
    required_bribed_fraction,
    select_strategy,
)
from .consensus import CommitteeMix, SimOutcome, SimScenario, check_slashing, fork_choice_head, run_scenario
from .dtoa import ArbitrageStrategy, ArbPath, MempoolTx, StrategySequence, get_cycles, run_dtoa, search
from .replay import capital_requirement, pbs_simulate, replay, select_pools, validate_strategy
from .rewards import DomainError, NetworkParams, RewardSchedule, proposer_reward

__all__ = [
    "ArbPath", "ArbitrageStrategy", "BribeProposer", "BribeValidators", "BriberyScenario",
    "CommitteeMix", "DomainError", "Honest", "LiquidityPool", "MarketState", "MempoolTx",
    "NetworkParams", "PoolError", "RewardSchedule", "SimOutcome", "SimScenario",
    "StrategySequence", "TokenGraph", "build_graph", "bribery_cost_proposer",
    "bribery_cost_validators", "capital_requirement", "check_slashing", "fork_choice_head",
    "get_cycles", "min_validator_fee", "pbs_simulate", "proposer_reward", "replay",
    "required_bribed_fraction", "run_dtoa", "run_scenario", "search", "select_pools",
    "select_strategy", "swap_out", "validate_strategy",
]
