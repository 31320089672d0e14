"""Bribery economics for delaying a block by one slot.

Projected fork weights, rational-validator utilities, minimal bribery fees,
the bribed fraction needed to win the fork, total costs of bribing the next
slot's validators versus its proposer, and the adaptive choice between them.

Vote weights are in validator-count units; money is GWei.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Optional, Union

from .rewards import DomainError, NetworkParams, RewardSchedule
from .units import GWEI_PER_ETH, exact, to_decimal, to_fraction

ONE_GWEI = Decimal(1)
QUARTER = Fraction(1, 4)


class InfeasibleBribery(DomainError):
    """The required bribed fraction exceeds the available rational validators."""


@dataclass(frozen=True)
class BriberyScenario:
    params: NetworkParams
    alpha_A: Fraction = Fraction(0)
    alpha_B: Fraction = Fraction(0)
    W_a: Fraction = Fraction(0)
    W_v: Fraction = Fraction(0)
    epsilon_m: Decimal = Decimal(0)
    rho: Decimal = Decimal(0)
    theta: Decimal = Decimal(501)
    sigma_per_validator: Decimal = Decimal(1)
    proposer_identity_known: bool = True
    schedule: Optional[RewardSchedule] = None

    def __post_init__(self):
        for name in ("alpha_A", "alpha_B", "W_a", "W_v"):
            object.__setattr__(self, name, to_fraction(getattr(self, name)))
        for name in ("epsilon_m", "rho", "theta", "sigma_per_validator"):
            object.__setattr__(self, name, to_decimal(getattr(self, name)))
        if self.schedule is None:
            object.__setattr__(self, "schedule", RewardSchedule.from_params(self.params))
        for name in ("alpha_A", "alpha_B"):
            value = getattr(self, name)
            if not 0 <= value < QUARTER:
                raise DomainError(f"{name} must lie in [0, 1/4), got {value}")
        if self.W_a < 0 or self.W_v < 0:
            raise DomainError("historical vote weights must be non-negative")
        if min(self.epsilon_m, self.rho, self.theta) < 0:
            raise DomainError("epsilon_m, rho and theta must be non-negative")
        if self.sigma_per_validator <= 0:
            raise DomainError("sigma_per_validator must be positive")

    @property
    def rational_share(self) -> Fraction:
        return 1 - self.alpha_A - self.alpha_B

    @classmethod
    def canonical(cls, params: NetworkParams, alpha_A, alpha_B=0, **kwargs) -> "BriberyScenario":
        """Main chain has no votes yet; the delayed block holds the adversary's slot-t votes."""
        alpha_A = to_fraction(alpha_A)
        kwargs.setdefault("W_v", 0)
        kwargs.setdefault("W_a", alpha_A * params.committee_fraction)
        return cls(params=params, alpha_A=alpha_A, alpha_B=alpha_B, **kwargs)


@dataclass(frozen=True)
class FeeQuote:
    min_fee_per_validator: Decimal
    min_proposer_fee: Decimal
    required_fraction_beta: Fraction

    @property
    def feasible(self) -> bool:
        return self.required_fraction_beta <= 1


@dataclass(frozen=True)
class CostBreakdown:
    total_fee: Decimal
    total_withdrawal: Decimal
    total_cost: Decimal
    bribee_count: int

    def __post_init__(self):
        if self.total_cost != self.total_fee + self.total_withdrawal:
            raise ValueError("total_cost must equal total_fee + total_withdrawal")


@dataclass(frozen=True)
class Honest:
    kind = "honest"


@dataclass(frozen=True)
class BribeValidators:
    fee_per_validator: Decimal
    bribee_count: int
    cost: Optional[CostBreakdown] = None
    kind = "bribe_validators"


@dataclass(frozen=True)
class BribeProposer:
    fee: Decimal
    cost: Optional[CostBreakdown] = None
    kind = "bribe_proposer"


BriberyDecision = Union[Honest, BribeValidators, BribeProposer]


def _as_decimal(q: Fraction) -> Decimal:
    return Decimal(q.numerator) / Decimal(q.denominator)


def project_weights(scenario: BriberyScenario, beta_q) -> tuple[Fraction, Fraction]:
    """Expected weights (bribery chain, main chain) after the next slot votes."""
    beta_q = to_fraction(beta_q)
    if not 0 <= beta_q <= 1:
        raise DomainError("beta_q must lie in [0, 1]")
    m = scenario.params.committee_fraction
    rational = scenario.rational_share * m
    w_b = scenario.W_a + scenario.alpha_A * m + beta_q * rational
    w_m = scenario.W_v + scenario.alpha_B * m + (1 - beta_q) * rational
    return w_b, w_m


def _win_probabilities(scenario: BriberyScenario) -> tuple[Fraction, Fraction]:
    """Unclamped probabilities that the main / bribery chain wins, beta_q ~ U[0, 1]."""
    N, S = scenario.params.N, scenario.params.S
    a, b = scenario.alpha_A, scenario.alpha_B
    denom = 2 * N * (1 - a - b)
    if denom <= 0:
        raise DomainError("alpha_A + alpha_B must be below 1")
    gap = scenario.W_v - scenario.W_a
    p_main = (S * (gap + 1) + N * (1 - 2 * a)) / denom
    p_bribe = (S * (1 - gap) + N * (1 - 2 * b)) / denom
    return p_main, p_bribe


def _clamp01(x: Fraction) -> Fraction:
    return min(max(x, Fraction(0)), Fraction(1))


@exact
def validator_utilities(scenario: BriberyScenario, epsilon_v) -> tuple[Decimal, Decimal]:
    """Expected utility of voting for the main chain and for the bribery chain."""
    p_main, p_bribe = _win_probabilities(scenario)
    R_A = scenario.schedule.R_A
    u_m = _as_decimal(_clamp01(p_main)) * (R_A + scenario.epsilon_m)
    u_b = _as_decimal(_clamp01(p_bribe)) * (R_A + to_decimal(epsilon_v))
    return u_m, u_b


@exact
def validator_fee_bound(scenario: BriberyScenario, competitor: bool) -> Decimal:
    """Right-hand side of the strict lower bound on the per-validator fee.

    Without a competing briber the adversary-B share and its bribe are taken as zero.
    """
    N, S = scenario.params.N, scenario.params.S
    R_A = scenario.schedule.R_A
    gap = _as_decimal(scenario.W_v - scenario.W_a)
    a = _as_decimal(scenario.alpha_A)
    if competitor:
        b = _as_decimal(scenario.alpha_B)
        eps_m = scenario.epsilon_m
    else:
        b = Decimal(0)
        eps_m = Decimal(0)
    denom = S * (1 - gap) + N * (1 - 2 * b)
    if denom <= 0:
        raise DomainError("bribery chain cannot win from this vote gap; no finite fee suffices")
    numer = 2 * S * R_A * gap + 2 * N * R_A * (b - a)
    numer += eps_m * (S * (1 + gap) + N * (1 - 2 * a))
    return numer / denom


@exact
def min_validator_fee(scenario: BriberyScenario, competitor: Optional[bool] = None) -> Decimal:
    """Smallest whole-GWei-stepped fee that makes bribed voting strictly preferable.

    ``competitor=None`` (unknown next proposer) takes the larger of both bounds.
    """
    if competitor is None:
        bound = max(validator_fee_bound(scenario, True), validator_fee_bound(scenario, False))
    else:
        bound = validator_fee_bound(scenario, competitor)
    fee = max(bound, Decimal(0)) + ONE_GWEI
    return max(fee, scenario.sigma_per_validator)


def bribed_fraction_threshold(alpha_A, alpha_B) -> Fraction:
    """Unclamped fraction of rational validators the bribery chain needs (strictly above)."""
    a, b = to_fraction(alpha_A), to_fraction(alpha_B)
    if a + b >= 1:
        raise DomainError("alpha_A + alpha_B must be below 1")
    return (1 - 3 * a) / (2 * (1 - a - b))


def required_bribed_fraction(scenario: BriberyScenario) -> Fraction:
    """Threshold clamped at zero; values above one mean bribing validators is infeasible."""
    return max(bribed_fraction_threshold(scenario.alpha_A, scenario.alpha_B), Fraction(0))


@exact
def proposer_fee_bound(scenario: BriberyScenario, adversarial: bool = False) -> Decimal:
    fee = scenario.schedule.R_P + ONE_GWEI
    if adversarial:
        fee += scenario.rho
    return fee


def quote_fees(scenario: BriberyScenario, competitor: Optional[bool] = None) -> FeeQuote:
    return FeeQuote(
        min_fee_per_validator=min_validator_fee(scenario, competitor),
        min_proposer_fee=proposer_fee_bound(scenario),
        required_fraction_beta=required_bribed_fraction(scenario),
    )


def bribee_count(scenario: BriberyScenario) -> int:
    beta = required_bribed_fraction(scenario)
    if beta > 1:
        raise InfeasibleBribery("cannot bribe validators: required fraction exceeds 1")
    return math.ceil(beta * scenario.rational_share * scenario.params.committee_fraction)


@exact
def bribery_cost_validators(scenario: BriberyScenario) -> CostBreakdown:
    count = bribee_count(scenario)
    b = _as_decimal(scenario.alpha_B)
    fee = (1 - b) * count * scenario.sigma_per_validator + b * (scenario.schedule.R_P + scenario.rho)
    withdrawal = count * scenario.theta
    return CostBreakdown(fee, withdrawal, fee + withdrawal, count)


@exact
def validator_cost_closed_form(scenario: BriberyScenario, sigma=None) -> Decimal:
    """Continuous-fraction total cost; ``sigma`` defaults to one validator's nominal fee."""
    sigma = scenario.sigma_per_validator if sigma is None else to_decimal(sigma)
    N, S = scenario.params.N, scenario.params.S
    a, b = _as_decimal(scenario.alpha_A), _as_decimal(scenario.alpha_B)
    return sigma + b * (scenario.schedule.R_P + scenario.rho) + (N - 3 * N * a) / (2 * S) * scenario.theta


@exact
def bribery_cost_proposer(scenario: BriberyScenario) -> CostBreakdown:
    fee = scenario.schedule.R_P + _as_decimal(scenario.alpha_B) * scenario.rho
    return CostBreakdown(fee, scenario.theta, fee + scenario.theta, 1)


def select_strategy(
    scenario: BriberyScenario,
    bribable_validator_fraction,
    proposer_bribable: bool,
    expected_arbitrage_profit,
) -> BriberyDecision:
    """Prefer bribing validators, fall back to the proposer, else build honestly.

    An attack is only chosen when the expected profit strictly exceeds its total cost.
    The proposer branch needs the next proposer's identity, which secret leader election hides.
    """
    bribable = to_fraction(bribable_validator_fraction)
    profit = to_decimal(expected_arbitrage_profit)
    beta = required_bribed_fraction(scenario)
    if beta <= 1 and bribable >= beta:
        cost = bribery_cost_validators(scenario)
        if profit > cost.total_cost:
            return BribeValidators(min_validator_fee(scenario), cost.bribee_count, cost)
    if proposer_bribable and scenario.proposer_identity_known:
        cost = bribery_cost_proposer(scenario)
        if profit > cost.total_cost:
            return BribeProposer(proposer_fee_bound(scenario), cost)
    return Honest()


@exact
def cost_gap_eth(N, alpha_A=0, alpha_B=QUARTER, S: int = 32, theta_eth="5.01e-7", sigma_eth=0) -> Decimal:
    """Validators-minus-proposer cost in ETH using R_P = sqrt(2N/1e9) and continuous fractions."""
    N = to_decimal(N)
    a, b = to_decimal(to_fraction(alpha_A)), to_decimal(to_fraction(alpha_B))
    R_P = (2 * N / GWEI_PER_ETH).sqrt()
    return to_decimal(sigma_eth) + (b - 1) * R_P + (N - 2 * S - 3 * N * a) / (2 * S) * to_decimal(theta_eth)


@exact
def validator_advantage_limit(S: int = 32, theta_eth="5.01e-7", alpha_A=0, alpha_B=QUARTER) -> Decimal:
    """Validator count above which bribing validators stops being cheaper (bisection)."""
    lo = Decimal(2 * S)
    if cost_gap_eth(lo, alpha_A, alpha_B, S, theta_eth) >= 0:
        raise DomainError("validators are never cheaper for these parameters")
    hi = lo * 2
    while cost_gap_eth(hi, alpha_A, alpha_B, S, theta_eth) < 0:
        lo, hi = hi, hi * 2
    while hi - lo > Decimal("1e-9"):
        mid = (lo + hi) / 2
        if cost_gap_eth(mid, alpha_A, alpha_B, S, theta_eth) < 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2
