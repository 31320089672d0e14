"""File formats: pool snapshots, mempool streams, scenarios, strategies and pool stats.

Amounts travel as decimal strings and are parsed exactly.  Every parse error
names the record (or line) and the offending field.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional

from .amm import LiquidityPool, MarketState, PoolError
from .bribery import BribeProposer, BribeValidators, BriberyDecision, BriberyScenario, Honest
from .consensus import CommitteeMix, SimScenario
from .dtoa import ArbitrageStrategy, ArbPath, MempoolTx, StrategySequence
from .rewards import NetworkParams
from .units import fmt, to_decimal, to_fraction


class FixtureError(ValueError):
    """A fixture file is malformed; the message names where."""


@dataclass(frozen=True)
class PoolStats:
    pool_id: str
    volume: Decimal
    liquidity: Decimal

    def __post_init__(self):
        object.__setattr__(self, "volume", to_decimal(self.volume))
        object.__setattr__(self, "liquidity", to_decimal(self.liquidity))
        if self.volume < 0 or self.liquidity < 0:
            raise ValueError(f"{self.pool_id}: volume and liquidity must be non-negative")


def _field(record: Mapping, name: str, where: str, parse=None, default=...):
    if not isinstance(record, Mapping):
        raise FixtureError(f"{where}: expected an object")
    if name not in record:
        if default is not ...:
            return default
        raise FixtureError(f"{where}: missing field {name!r}")
    value = record[name]
    if parse is None:
        return value
    try:
        return parse(value)
    except (ValueError, TypeError) as exc:
        raise FixtureError(f"{where}: bad field {name!r}: {exc}") from None


def _amount(value) -> Decimal:
    if isinstance(value, float):
        raise TypeError("amounts must be decimal strings or integers, not floats")
    return to_decimal(value)


def _text(value) -> str:
    if not isinstance(value, str) or not value:
        raise TypeError("expected a non-empty string")
    return value


def _integer(value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise TypeError("expected an integer")
    return value


def _read_json(path: Path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FixtureError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None


# -- pools -----------------------------------------------------------------

def pool_from_record(record: Mapping, where: str) -> LiquidityPool:
    try:
        return LiquidityPool(
            pool_id=_field(record, "pool_id", where, _text),
            token0=_field(record, "token0", where, _text),
            token1=_field(record, "token1", where, _text),
            reserve0=_field(record, "reserve0", where, _amount),
            reserve1=_field(record, "reserve1", where, _amount),
            fee=_field(record, "fee", where, _amount, Decimal(0)),
            venue=_field(record, "venue", where, str, ""),
        )
    except PoolError as exc:
        raise FixtureError(f"{where}: {exc}") from None


def pool_to_record(pool: LiquidityPool) -> dict:
    return {
        "pool_id": pool.pool_id,
        "venue": pool.venue,
        "token0": pool.token0,
        "token1": pool.token1,
        "reserve0": fmt(pool.reserve0),
        "reserve1": fmt(pool.reserve1),
        "fee": fmt(pool.fee),
    }


def parse_pools(records, source: str = "pools") -> MarketState:
    if not isinstance(records, list):
        raise FixtureError(f"{source}: expected a JSON array of pools")
    pools, seen = [], set()
    for i, record in enumerate(records):
        pool = pool_from_record(record, f"{source} record {i}")
        if pool.pool_id in seen:
            raise FixtureError(f"{source} record {i}: duplicate pool_id {pool.pool_id!r}")
        seen.add(pool.pool_id)
        pools.append(pool)
    return MarketState.of(pools)


def load_pools(path) -> MarketState:
    return parse_pools(_read_json(path), str(path))


def dump_pools(state: MarketState) -> list[dict]:
    return [pool_to_record(state.pools[k]) for k in sorted(state.pools)]


_SLOT_FILE = re.compile(r"slot_(\d+)\.json$")


def load_snapshots(path) -> dict[int, MarketState]:
    """Per-slot pool snapshots from a directory of ``slot_<n>.json`` files or one JSON object keyed by slot."""
    path = Path(path)
    if path.is_dir():
        snapshots = {}
        for child in sorted(path.iterdir()):
            m = _SLOT_FILE.fullmatch(child.name)
            if m:
                snapshots[int(m.group(1))] = load_pools(child)
        if not snapshots:
            raise FixtureError(f"{path}: no slot_<n>.json files")
        return snapshots
    data = _read_json(path)
    if isinstance(data, list):
        raise FixtureError(f"{path}: expected an object keyed by slot number, got a single pool array")
    if not isinstance(data, dict):
        raise FixtureError(f"{path}: expected an object keyed by slot number")
    snapshots = {}
    for key, records in data.items():
        try:
            slot = int(key)
        except ValueError:
            raise FixtureError(f"{path}: slot key {key!r} is not an integer") from None
        snapshots[slot] = parse_pools(records, f"{path} slot {slot}")
    return snapshots


# -- mempool ---------------------------------------------------------------

def tx_from_record(record: Mapping, where: str) -> MempoolTx:
    try:
        return MempoolTx(
            tx_id=_field(record, "tx_id", where, _text),
            observed_ms=_field(record, "observed_ms", where, _integer),
            pool_id=_field(record, "pool_id", where, _text),
            input_token=_field(record, "input_token", where, _text),
            amount_in=_field(record, "amount_in", where, _amount),
            gas_price=_field(record, "gas_price", where, _amount, Decimal(0)),
            gas_limit=_field(record, "gas_limit", where, _integer, 0),
        )
    except ValueError as exc:
        if isinstance(exc, FixtureError):
            raise
        raise FixtureError(f"{where}: {exc}") from None


def tx_to_record(tx: MempoolTx) -> dict:
    return {
        "tx_id": tx.tx_id,
        "observed_ms": tx.observed_ms,
        "pool_id": tx.pool_id,
        "input_token": tx.input_token,
        "amount_in": fmt(tx.amount_in),
        "gas_price": fmt(tx.gas_price),
        "gas_limit": tx.gas_limit,
    }


def parse_mempool(lines: Iterable[str], source: str = "mempool") -> list[MempoolTx]:
    txs, seen = [], set()
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        where = f"{source} line {lineno}"
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FixtureError(f"{where}: invalid JSON: {exc.msg}") from None
        tx = tx_from_record(record, where)
        if tx.tx_id in seen:
            raise FixtureError(f"{where}: duplicate tx_id {tx.tx_id!r}")
        seen.add(tx.tx_id)
        txs.append(tx)
    return txs


def load_mempool(path) -> list[MempoolTx]:
    with open(path) as fh:
        return parse_mempool(fh, str(path))


# -- strategies ------------------------------------------------------------

def strategy_to_record(strategy: ArbitrageStrategy) -> dict:
    return {
        "t_others": [tx_to_record(tx) for tx in strategy.t_others],
        "path": {"assets": list(strategy.path.assets), "pools": list(strategy.path.pools)},
        "amount": fmt(strategy.amount),
        "revenue": fmt(strategy.revenue),
    }


def strategy_from_record(record: Mapping, where: str = "strategy") -> ArbitrageStrategy:
    path_rec = _field(record, "path", where)
    try:
        path = ArbPath(_field(path_rec, "assets", f"{where}.path"), _field(path_rec, "pools", f"{where}.path"))
    except ValueError as exc:
        raise FixtureError(f"{where}: bad field 'path': {exc}") from None
    others = tuple(tx_from_record(r, f"{where}.t_others[{i}]") for i, r in enumerate(_field(record, "t_others", where, list, [])))
    return ArbitrageStrategy(
        t_others=others,
        path=path,
        amount=_field(record, "amount", where, _amount),
        revenue=_field(record, "revenue", where, _amount, Decimal(0)),
    )


def sequence_to_records(sequence: StrategySequence) -> list[dict]:
    return [strategy_to_record(s) for s in sequence]


@dataclass(frozen=True)
class StrategyFile:
    """A strategy together with the pool state it was found on, as consumed by the PBS tool."""

    strategy: ArbitrageStrategy
    state: MarketState
    gas_price_gwei: Decimal = Decimal(0)
    gas_per_hop: int = 120_000

    def to_dict(self) -> dict:
        return {
            "strategy": strategy_to_record(self.strategy),
            "pools": dump_pools(self.state),
            "gas_price_gwei": fmt(self.gas_price_gwei),
            "gas_per_hop": self.gas_per_hop,
        }


def load_strategy_file(path) -> StrategyFile:
    data = _read_json(path)
    where = str(path)
    return StrategyFile(
        strategy=strategy_from_record(_field(data, "strategy", where), f"{where} strategy"),
        state=parse_pools(_field(data, "pools", where), f"{where} pools"),
        gas_price_gwei=_field(data, "gas_price_gwei", where, _amount, Decimal(0)),
        gas_per_hop=_field(data, "gas_per_hop", where, _integer, 120_000),
    )


# -- pool stats ------------------------------------------------------------

def load_pool_stats(path) -> list[PoolStats]:
    stats, seen = [], set()
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"pool_id", "volume", "liquidity"} - set(reader.fieldnames or ())
        if missing:
            raise FixtureError(f"{path}: missing columns {sorted(missing)}")
        for lineno, row in enumerate(reader, 2):
            where = f"{path} line {lineno}"
            pool_id = row["pool_id"]
            if not pool_id:
                raise FixtureError(f"{where}: empty field 'pool_id'")
            if pool_id in seen:
                raise FixtureError(f"{where}: duplicate pool_id {pool_id!r}")
            seen.add(pool_id)
            values = {}
            for name in ("volume", "liquidity"):
                values[name] = _field(row, name, where, _amount)
                if values[name] < 0:
                    raise FixtureError(f"{where}: field {name!r} must be non-negative")
            stats.append(PoolStats(pool_id, values["volume"], values["liquidity"]))
    return stats


# -- scenarios -------------------------------------------------------------

def decision_from_record(record: Optional[Mapping], where: str = "attack") -> BriberyDecision:
    if record is None:
        return Honest()
    kind = _field(record, "kind", where, str)
    if kind == "honest":
        return Honest()
    if kind == "bribe_validators":
        return BribeValidators(
            _field(record, "fee_per_validator", where, _amount),
            _field(record, "bribee_count", where, _integer, 0),
        )
    if kind == "bribe_proposer":
        return BribeProposer(_field(record, "fee", where, _amount))
    raise FixtureError(f"{where}: unknown attack kind {kind!r}")


def decision_to_record(decision: BriberyDecision) -> dict:
    if isinstance(decision, BribeValidators):
        return {"kind": decision.kind, "fee_per_validator": fmt(to_decimal(decision.fee_per_validator)),
                "bribee_count": decision.bribee_count}
    if isinstance(decision, BribeProposer):
        return {"kind": decision.kind, "fee": fmt(to_decimal(decision.fee))}
    return {"kind": "honest"}


def _ratio(value) -> Fraction:
    if isinstance(value, float):
        value = repr(value)
    if isinstance(value, str) and "/" in value:
        return Fraction(value)
    return to_fraction(value)


@dataclass
class ScenarioConfig:
    """Shared scenario file: network parameters, bribery inputs, simulator and replay settings."""

    params: NetworkParams
    alpha_A: Fraction = Fraction(0)
    alpha_B: Fraction = Fraction(0)
    W_a: Optional[Fraction] = None
    W_v: Fraction = Fraction(0)
    epsilon_m: Decimal = Decimal(0)
    rho_gwei: Decimal = Decimal(0)
    theta_gwei: Decimal = Decimal(501)
    sigma_gwei: Decimal = Decimal(1)
    proposer_identity_known: bool = True
    bribable_fraction: Fraction = Fraction(0)
    proposer_bribable: bool = False
    counts: Optional[CommitteeMix] = None
    attack: BriberyDecision = field(default_factory=Honest)
    message_delay_ms: int = 4000
    horizon_slots: int = 8
    seed: int = 0
    next_proposer: str = "auto"
    proposer_boost: bool = True
    base_asset: str = "ETH"
    max_cycle_len: int = 4
    gas_price_gwei: Decimal = Decimal(0)
    gas_per_hop: int = 120_000
    flash_loan: bool = False
    flash_fee: Decimal = Decimal(0)

    def bribery_scenario(self, rho_gwei=None) -> BriberyScenario:
        W_a = self.W_a if self.W_a is not None else self.alpha_A * self.params.committee_fraction
        return BriberyScenario(
            params=self.params,
            alpha_A=self.alpha_A,
            alpha_B=self.alpha_B,
            W_a=W_a,
            W_v=self.W_v,
            epsilon_m=self.epsilon_m,
            rho=self.rho_gwei if rho_gwei is None else rho_gwei,
            theta=self.theta_gwei,
            sigma_per_validator=self.sigma_gwei,
            proposer_identity_known=self.proposer_identity_known,
        )

    def sim_scenario(self, seed: Optional[int] = None) -> SimScenario:
        if self.counts is None:
            raise FixtureError("scenario: field 'counts' is required for the consensus simulator")
        return SimScenario(
            params=self.params,
            mix=self.counts,
            attack=self.attack,
            message_delay_ms=self.message_delay_ms,
            horizon_slots=self.horizon_slots,
            seed=self.seed if seed is None else seed,
            next_proposer=self.next_proposer,
            rho=self.rho_gwei,
            proposer_boost=self.proposer_boost,
        )

    def to_dict(self) -> dict:
        p = self.params
        out: dict[str, Any] = {
            "N": p.N, "S": p.S, "d": fmt(p.d), "p": fmt(p.p),
            "alpha_A": str(self.alpha_A), "alpha_B": str(self.alpha_B),
            "W_v": str(self.W_v),
            "epsilon_m": fmt(self.epsilon_m), "rho_gwei": fmt(self.rho_gwei),
            "theta_gwei": fmt(self.theta_gwei), "sigma_gwei": fmt(self.sigma_gwei),
            "proposer_identity_known": self.proposer_identity_known,
            "bribable_fraction": str(self.bribable_fraction),
            "proposer_bribable": self.proposer_bribable,
            "attack": decision_to_record(self.attack),
            "message_delay_ms": self.message_delay_ms, "horizon_slots": self.horizon_slots,
            "seed": self.seed, "next_proposer": self.next_proposer, "proposer_boost": self.proposer_boost,
            "base_asset": self.base_asset, "max_cycle_len": self.max_cycle_len,
            "gas_price_gwei": fmt(self.gas_price_gwei), "gas_per_hop": self.gas_per_hop,
            "flash_loan": self.flash_loan, "flash_fee": fmt(self.flash_fee),
        }
        if self.W_a is not None:
            out["W_a"] = str(self.W_a)
        if self.counts is not None:
            out["counts"] = {
                "malicious_A": self.counts.malicious_A,
                "malicious_B": self.counts.malicious_B,
                "bribable_rational": self.counts.bribable_rational,
                "altruistic": self.counts.altruistic,
            }
        return out


def _boolean(value) -> bool:
    if not isinstance(value, bool):
        raise TypeError("expected true or false")
    return value


def scenario_from_dict(data: Mapping, where: str = "scenario") -> ScenarioConfig:
    if not isinstance(data, Mapping):
        raise FixtureError(f"{where}: expected an object")
    try:
        params = NetworkParams(
            N=_field(data, "N", where, _integer),
            S=_field(data, "S", where, _integer, 32),
            d=_field(data, "d", where, _amount, Decimal(32)),
            p=_field(data, "p", where, _amount, Decimal(64)),
        )
    except ValueError as exc:
        if isinstance(exc, FixtureError):
            raise
        raise FixtureError(f"{where}: {exc}") from None
    counts = None
    if "counts" in data:
        raw = data["counts"]
        counts = CommitteeMix(**{
            name: _field(raw, name, f"{where}.counts", _integer, 0)
            for name in ("malicious_A", "malicious_B", "bribable_rational", "altruistic")
        })
    if counts is not None and params.N % params.S == 0:
        m = params.committee_size
        default_a, default_b = Fraction(counts.malicious_A, m), Fraction(counts.malicious_B, m)
        default_bribable = Fraction(counts.bribable_rational, max(counts.rational, 1))
    else:
        default_a = default_b = default_bribable = Fraction(0)
    W_a = data.get("W_a")
    return ScenarioConfig(
        params=params,
        alpha_A=_field(data, "alpha_A", where, _ratio, default_a),
        alpha_B=_field(data, "alpha_B", where, _ratio, default_b),
        W_a=None if W_a is None else _field(data, "W_a", where, _ratio),
        W_v=_field(data, "W_v", where, _ratio, Fraction(0)),
        epsilon_m=_field(data, "epsilon_m", where, _amount, Decimal(0)),
        rho_gwei=_field(data, "rho_gwei", where, _amount, Decimal(0)),
        theta_gwei=_field(data, "theta_gwei", where, _amount, Decimal(501)),
        sigma_gwei=_field(data, "sigma_gwei", where, _amount, Decimal(1)),
        proposer_identity_known=_field(data, "proposer_identity_known", where, _boolean, True),
        bribable_fraction=_field(data, "bribable_fraction", where, _ratio, default_bribable),
        proposer_bribable=_field(data, "proposer_bribable", where, _boolean, False),
        counts=counts,
        attack=decision_from_record(data.get("attack"), f"{where}.attack"),
        message_delay_ms=_field(data, "message_delay_ms", where, _integer, 4000),
        horizon_slots=_field(data, "horizon_slots", where, _integer, 8),
        seed=_field(data, "seed", where, _integer, 0),
        next_proposer=_field(data, "next_proposer", where, str, "auto"),
        proposer_boost=_field(data, "proposer_boost", where, _boolean, True),
        base_asset=_field(data, "base_asset", where, _text, "ETH"),
        max_cycle_len=_field(data, "max_cycle_len", where, _integer, 4),
        gas_price_gwei=_field(data, "gas_price_gwei", where, _amount, Decimal(0)),
        gas_per_hop=_field(data, "gas_per_hop", where, _integer, 120_000),
        flash_loan=_field(data, "flash_loan", where, _boolean, False),
        flash_fee=_field(data, "flash_fee", where, _amount, Decimal(0)),
    )


def load_scenario(path) -> ScenarioConfig:
    return scenario_from_dict(_read_json(path), str(path))
