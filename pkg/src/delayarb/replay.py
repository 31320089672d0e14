"""Slot-by-slot replay of delayed arbitrage with cost accounting, plus PBS ordering.

Report amounts are in base-asset units.  Gas prices and bribery costs are
GWei and are converted at 1e9 GWei per base unit, so the base asset is
assumed to be ETH (or WETH).
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .amm import MarketState, PoolError, apply_swap
from .bribery import Honest, select_strategy
from .dtoa import ArbitrageStrategy, MempoolTx, StrategySequence, execute_strategy, run_dtoa, simulate_path
from .fixtures import PoolStats, ScenarioConfig, StrategyFile
from .units import eth_to_gwei, exact, fmt, gwei_to_eth, to_decimal

log = logging.getLogger(__name__)

SLOT_MS = 12_000
DTOA_WINDOW_MS = 8_000
MIN_HOPS = 2


# -- pool selection --------------------------------------------------------

def _score_key(stat: PoolStats):
    if stat.liquidity == 0:
        return (0, Fraction(0), stat.pool_id)
    return (1, -Fraction(stat.volume) / Fraction(stat.liquidity), stat.pool_id)


def select_pools(stats: Sequence[PoolStats], k: int) -> list[str]:
    """Top ``k`` pools by volume / liquidity (busy, shallow pools move most); ties by pool_id."""
    if k < 0 or k > len(stats):
        raise ValueError(f"cannot select {k} of {len(stats)} pools")
    return [s.pool_id for s in sorted(stats, key=_score_key)[:k]]


def select_pools_random(stats: Sequence[PoolStats], k: int, seed: int) -> list[str]:
    if k < 0 or k > len(stats):
        raise ValueError(f"cannot select {k} of {len(stats)} pools")
    ids = sorted(s.pool_id for s in stats)
    return random.Random(seed).sample(ids, k)


# -- per-strategy accounting -----------------------------------------------

@exact
def validate_strategy(strategy: ArbitrageStrategy, gas_price, gas_per_hop: int) -> Decimal:
    """Revenue minus gas; a result <= 0 means the strategy must not be executed.

    ``gas_price`` is in revenue units per gas unit.
    """
    return strategy.revenue - to_decimal(gas_price) * gas_per_hop * strategy.hops


@exact
def capital_requirement(strategy: ArbitrageStrategy, flash_loan: bool, flash_fee=0, gas=0) -> Decimal:
    """Base-asset funds needed up front to run ``strategy``."""
    gas = to_decimal(gas)
    if flash_loan:
        return gas + to_decimal(flash_fee) * strategy.amount
    return strategy.amount + gas


# -- replay ----------------------------------------------------------------

@dataclass(frozen=True)
class SlotRecord:
    slot: int
    status: str
    decision: str
    strategies: int
    rejected: int
    gross: Decimal
    gas: Decimal
    bribery_cost: Decimal
    net: Decimal
    capital_no_flash: Decimal
    capital_flash: Decimal

    def to_dict(self) -> dict:
        row = asdict(self)
        for key, value in row.items():
            if isinstance(value, Decimal):
                row[key] = fmt(value)
        return row


REPORT_COLUMNS = [f.name for f in SlotRecord.__dataclass_fields__.values()]
_MONEY = ("gross", "gas", "bribery_cost", "net", "capital_no_flash", "capital_flash")


@dataclass
class ReplayReport:
    rows: list[SlotRecord] = field(default_factory=list)
    executed: dict[int, list[StrategyFile]] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @property
    def totals(self) -> dict:
        totals = {"strategies": sum(r.strategies for r in self.rows)}
        for name in _MONEY:
            if name.startswith("capital"):
                totals[name] = max((getattr(r, name) for r in self.rows), default=Decimal(0))
            else:
                totals[name] = sum((getattr(r, name) for r in self.rows), Decimal(0))
        return totals

    def to_dict(self) -> dict:
        totals = {k: fmt(v) if isinstance(v, Decimal) else v for k, v in self.totals.items()}
        return {"slots": [r.to_dict() for r in self.rows], "totals": totals, "warnings": list(self.warnings)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=REPORT_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow(row.to_dict())
        return buf.getvalue()

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(self.to_json() + "\n")
        (out / "report.csv").write_text(self.to_csv())
        strategies = out / "strategies"
        for slot, files in sorted(self.executed.items()):
            strategies.mkdir(exist_ok=True)
            for i, sf in enumerate(files):
                path = strategies / f"slot_{slot}_{i}.json"
                path.write_text(json.dumps(sf.to_dict(), indent=2, sort_keys=True) + "\n")


def mempool_window(mempool: Iterable[MempoolTx], slot: int) -> list[MempoolTx]:
    start = slot * SLOT_MS
    return [tx for tx in mempool if start <= tx.observed_ms < start + DTOA_WINDOW_MS]


def _accepted_prefix(sequence: StrategySequence, gas_unit: Decimal, gas_per_hop: int):
    accepted, rejected = [], 0
    for strategy in sequence:
        if validate_strategy(strategy, gas_unit, gas_per_hop) <= 0:
            rejected = len(sequence) - len(accepted)
            break
        accepted.append(strategy)
    return accepted, rejected


def _missing_row(slot: int) -> SlotRecord:
    zero = Decimal(0)
    return SlotRecord(slot, "missing_snapshot", "honest", 0, 0, zero, zero, zero, zero, zero, zero)


@exact
def replay_slot(slot: int, state: MarketState, window: Sequence[MempoolTx], config: ScenarioConfig):
    """One slot: delayed search, validation, bribery decision and accounting."""
    gas_unit = gwei_to_eth(config.gas_price_gwei)
    gas_per_hop = config.gas_per_hop
    target = gas_unit * gas_per_hop * MIN_HOPS
    search = dict(base_asset=config.base_asset, max_len=config.max_cycle_len)

    delayed = run_dtoa(state, window, target, **search)
    accepted, rejected = _accepted_prefix(delayed, gas_unit, gas_per_hop)
    profit = sum((validate_strategy(s, gas_unit, gas_per_hop) for s in accepted), Decimal(0))
    profit_gwei = eth_to_gwei(profit)
    scenario = config.bribery_scenario(rho_gwei=profit_gwei)
    decision = select_strategy(scenario, config.bribable_fraction, config.proposer_bribable, profit_gwei)

    bribery = Decimal(0)
    if isinstance(decision, Honest):
        timely = run_dtoa(state, (), target, ordering=False, **search)
        accepted, rejected = _accepted_prefix(timely, gas_unit, gas_per_hop)
    else:
        bribery = gwei_to_eth(decision.cost.total_cost)

    gross = sum((s.revenue for s in accepted), Decimal(0))
    gas = sum((gas_unit * gas_per_hop * s.hops for s in accepted), Decimal(0))
    files, cap_plain, cap_flash = [], Decimal(0), Decimal(0)
    current = state
    for s in accepted:
        files.append(StrategyFile(s, current, config.gas_price_gwei, gas_per_hop))
        current, _ = execute_strategy(s, current)
        s_gas = gas_unit * gas_per_hop * s.hops
        cap_plain = max(cap_plain, capital_requirement(s, False, config.flash_fee, s_gas))
        cap_flash = max(cap_flash, capital_requirement(s, True, config.flash_fee, s_gas))
    row = SlotRecord(
        slot=slot,
        status="ok",
        decision=decision.kind,
        strategies=len(accepted),
        rejected=rejected,
        gross=gross,
        gas=gas,
        bribery_cost=bribery,
        net=gross - gas - bribery,
        capital_no_flash=cap_plain,
        capital_flash=cap_flash,
    )
    return row, files


def replay(
    snapshots: Mapping[int, MarketState],
    mempool: Sequence[MempoolTx],
    config: ScenarioConfig,
    slots: Optional[Iterable[int]] = None,
    parallel: bool = False,
) -> ReplayReport:
    """Replay every slot from the first to the last one seen in snapshots or mempool.

    Snapshots reset the state each slot, so ``parallel=True`` gives the same report.
    """
    if slots is None:
        seen = set(snapshots) | {tx.observed_ms // SLOT_MS for tx in mempool}
        slots = range(min(seen), max(seen) + 1) if seen else ()
    slots = sorted(slots)

    def one(slot: int):
        if slot not in snapshots:
            return _missing_row(slot), []
        return replay_slot(slot, snapshots[slot], mempool_window(mempool, slot), config)

    if parallel:
        with ThreadPoolExecutor() as pool:
            results = list(pool.map(one, slots))
    else:
        results = [one(slot) for slot in slots]

    report = ReplayReport()
    for slot, (row, files) in zip(slots, results):
        if row.status == "missing_snapshot":
            message = f"slot {slot}: no pool snapshot, skipped"
            log.warning(message)
            report.warnings.append(message)
        report.rows.append(row)
        if files:
            report.executed[slot] = files
    return report


# -- proposer-builder separation --------------------------------------------

@dataclass(frozen=True)
class PBSSummary:
    trials: int
    mean: Decimal
    std: Decimal
    min: Decimal
    max: Decimal
    intended_fraction: float
    controlled: Decimal

    def to_dict(self) -> dict:
        row = asdict(self)
        return {k: fmt(v) if isinstance(v, Decimal) else v for k, v in row.items()}


@exact
def pbs_profit_at(strategy: ArbitrageStrategy, state: MarketState, position: int, gas_cost=0) -> Decimal:
    """Net profit when the arbitrage lands at ``position`` among the other transactions.

    The others keep their relative order.  A losing arbitrage reverts and only pays gas.
    """
    gas_cost = to_decimal(gas_cost)
    others = strategy.t_others
    if not 0 <= position <= len(others):
        raise ValueError(f"position {position} outside 0..{len(others)}")
    for tx in others[:position]:
        try:
            state = apply_swap(state, tx.pool_id, tx.input_token, tx.amount_in)
        except PoolError:
            continue
    out, _ = simulate_path(strategy.path, state, strategy.amount)
    gain = out - strategy.amount
    return max(gain, Decimal(0)) - gas_cost


@exact
def pbs_expected_profit(strategy: ArbitrageStrategy, state: MarketState, gas_cost=0) -> Decimal:
    """Exact mean over every insertion position of the arbitrage transaction."""
    positions = len(strategy.t_others) + 1
    total = sum((pbs_profit_at(strategy, state, i, gas_cost) for i in range(positions)), Decimal(0))
    return total / positions


@exact
def pbs_simulate(strategy: ArbitrageStrategy, state: MarketState, trials: int, seed: int, gas_cost=0) -> PBSSummary:
    """Monte Carlo over uniformly random builder orderings."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    rng = random.Random(seed)
    k = len(strategy.t_others)
    cache: dict[int, Decimal] = {}
    samples, intended = [], 0
    for _ in range(trials):
        pos = rng.randrange(k + 1)
        if pos not in cache:
            cache[pos] = pbs_profit_at(strategy, state, pos, gas_cost)
        samples.append(cache[pos])
        intended += pos == k
    mean = sum(samples, Decimal(0)) / trials
    var = sum(((x - mean) ** 2 for x in samples), Decimal(0)) / trials
    controlled = cache.get(k)
    if controlled is None:
        controlled = pbs_profit_at(strategy, state, k, gas_cost)
    return PBSSummary(
        trials=trials,
        mean=mean,
        std=var.sqrt(),
        min=min(samples),
        max=max(samples),
        intended_fraction=intended / trials,
        controlled=controlled,
    )


def standard_error(summary: PBSSummary) -> float:
    return float(summary.std) / math.sqrt(summary.trials)
