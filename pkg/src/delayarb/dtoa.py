"""Delayed transaction ordering for cyclic arbitrage.

Each round builds the price graph, enumerates cycles through the base asset,
front-runs every path with the pending transactions that improve its price,
sizes the trade, and executes the single most profitable strategy before
searching again.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .amm import LiquidityPool, MarketState, PoolError, TokenGraph, apply_swap, build_graph
from .units import exact, floor_amount, to_decimal

GOLDEN = (Decimal(5).sqrt() - 1) / 2
GOLDEN_TOL = Decimal("1e-9")
GOLDEN_MAX_ITER = 200


class UnsupportedCurve(ValueError):
    """A hop is not a constant-product pool; use the golden-section search instead."""


@dataclass(frozen=True)
class ArbPath:
    assets: tuple[str, ...]
    pools: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "assets", tuple(self.assets))
        object.__setattr__(self, "pools", tuple(self.pools))
        if len(self.assets) != len(self.pools) + 1:
            raise ValueError("a path needs one more asset than pools")
        if len(self.pools) < 2:
            raise ValueError("a cycle needs at least two hops")
        if self.assets[0] != self.assets[-1]:
            raise ValueError("a cycle must end at its starting asset")
        if len(set(self.pools)) != len(self.pools):
            raise ValueError("hops must use distinct pools")

    @property
    def base(self) -> str:
        return self.assets[0]

    @property
    def hops(self) -> int:
        return len(self.pools)

    def steps(self):
        return zip(self.assets[:-1], self.pools)

    def inverse(self) -> "ArbPath":
        return ArbPath(self.assets[::-1], self.pools[::-1])

    def __str__(self):
        parts = [self.assets[0]]
        for asset, pool in zip(self.assets[1:], self.pools):
            parts.append(f"-[{pool}]->{asset}")
        return "".join(parts)


@dataclass(frozen=True)
class VirtualPool:
    Q_v0: Decimal
    Q_v0_out: Decimal
    fee: Decimal = Decimal(0)

    def __post_init__(self):
        if self.Q_v0 <= 0 or self.Q_v0_out <= 0:
            raise ValueError("virtual reserves must be positive")


@dataclass(frozen=True)
class MempoolTx:
    tx_id: str
    observed_ms: int
    pool_id: str
    input_token: str
    amount_in: Decimal
    gas_price: Decimal = Decimal(0)
    gas_limit: int = 0

    def __post_init__(self):
        object.__setattr__(self, "amount_in", to_decimal(self.amount_in))
        object.__setattr__(self, "gas_price", to_decimal(self.gas_price))
        if self.amount_in <= 0:
            raise ValueError(f"{self.tx_id}: amount_in must be positive")


@dataclass(frozen=True)
class ArbitrageStrategy:
    t_others: tuple[MempoolTx, ...]
    path: ArbPath
    amount: Decimal
    revenue: Decimal

    @property
    def hops(self) -> int:
        return self.path.hops


@dataclass
class StrategySequence:
    strategies: list[ArbitrageStrategy] = field(default_factory=list)

    def __len__(self):
        return len(self.strategies)

    def __iter__(self):
        return iter(self.strategies)

    def __getitem__(self, i):
        return self.strategies[i]

    @property
    @exact
    def total_revenue(self) -> Decimal:
        return sum((s.revenue for s in self.strategies), Decimal(0))


def get_cycles(graph: TokenGraph, base_asset: str, max_len: int = 4) -> list[ArbPath]:
    """All simple cycles through ``base_asset`` with at most ``max_len`` hops.

    Depth-first over pool edges; every cycle shows up once per direction.
    """
    if base_asset not in graph.nodes or max_len < 2:
        return []
    found: list[ArbPath] = []

    def walk(node: str, assets: list[str], pools: list[str]) -> None:
        for edge in graph.out_edges(node):
            if edge.pool_id in pools:
                continue
            if edge.dst == base_asset:
                if len(pools) >= 1:
                    found.append(ArbPath(assets + [base_asset], pools + [edge.pool_id]))
                continue
            if edge.dst in assets or len(pools) + 1 >= max_len:
                continue
            walk(edge.dst, assets + [edge.dst], pools + [edge.pool_id])

    walk(base_asset, [base_asset], [])
    return found


def path_weight(path: ArbPath, state: MarketState) -> Fraction:
    """Product of spot exchange rates along the path (fees ignored)."""
    product = Fraction(1)
    for asset, pool_id in path.steps():
        product *= state[pool_id].spot_rate(asset)
    return product


def order_transactions(
    path: ArbPath, state: MarketState, mempool: Iterable[MempoolTx]
) -> tuple[list[MempoolTx], MarketState]:
    """Greedily keep pending transactions that raise the path's rate product."""
    on_path = set(path.pools)
    tentative = state
    weight = path_weight(path, state)
    chosen: list[MempoolTx] = []
    for tx in sorted(mempool, key=lambda t: (t.observed_ms, t.tx_id)):
        if tx.pool_id not in on_path:
            continue
        try:
            candidate = apply_swap(tentative, tx.pool_id, tx.input_token, tx.amount_in)
        except PoolError:
            continue
        new_weight = path_weight(path, candidate)
        if new_weight > weight:
            chosen.append(tx)
            tentative, weight = candidate, new_weight
    return chosen, tentative


@exact
def fold_virtual_pool(hops: Sequence[tuple[LiquidityPool, str]]) -> VirtualPool:
    """Fold ``(pool, input asset)`` hops into one two-asset pool with the same input/output curve.

    The virtual pool charges the first hop's fee; each later hop's fee is
    absorbed into the folded reserves.
    """
    if not hops:
        raise ValueError("need at least one hop")
    for pool, _ in hops:
        if not getattr(pool, "is_constant_product", False):
            raise UnsupportedCurve(pool.pool_id)
    first, first_asset = hops[0]
    e_in = first.reserve_of(first_asset)
    e_out = first.reserve_of(first.other(first_asset))
    for pool, asset in hops[1:]:
        r_in = pool.reserve_of(asset)
        r_out = pool.reserve_of(pool.other(asset))
        gamma = 1 - pool.fee
        denom = r_in + gamma * e_out
        e_in, e_out = e_in * r_in / denom, gamma * e_out * r_out / denom
    return VirtualPool(e_in, e_out, first.fee)


def compose_virtual_pool(path: ArbPath, state: MarketState) -> VirtualPool:
    return fold_virtual_pool([(state[pool_id], asset) for asset, pool_id in path.steps()])


@exact
def optimal_amount(vpool: VirtualPool) -> Decimal:
    gamma = 1 - vpool.fee
    amount = ((vpool.Q_v0 * vpool.Q_v0_out * gamma).sqrt() - vpool.Q_v0) / gamma
    return max(amount, Decimal(0))


def simulate_path(path: ArbPath, state: MarketState, amount) -> tuple[Decimal, MarketState]:
    """Route ``amount`` of the base asset through every hop; returns (output, new state)."""
    amount = floor_amount(to_decimal(amount))
    value = amount
    for asset, pool_id in path.steps():
        pool, value = state[pool_id].after_swap(asset, value)
        state = state.replace(pool)
    return value, state


@exact
def path_revenue(path: ArbPath, state: MarketState, amount) -> Decimal:
    amount = floor_amount(to_decimal(amount))
    out, _ = simulate_path(path, state, amount)
    return out - amount


@exact
def golden_section_search(path: ArbPath, state: MarketState) -> tuple[Decimal, Decimal]:
    """Maximise simulated revenue for any pool curve, assuming it is unimodal in the input."""
    revenue = lambda x: path_revenue(path, state, x)
    first = state[path.pools[0]]
    hi = first.reserve_of(path.base)
    for _ in range(128):
        if revenue(2 * hi) <= revenue(hi):
            break
        hi *= 2
    lo, hi = Decimal(0), 2 * hi
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = revenue(x1), revenue(x2)
    for _ in range(GOLDEN_MAX_ITER):
        if hi - lo <= GOLDEN_TOL * max(abs(x1), abs(x2), Decimal("1e-18")):
            break
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = revenue(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = revenue(x1)
    best = floor_amount(x1 if f1 >= f2 else x2)
    gain = revenue(best)
    if gain <= 0:
        return Decimal(0), Decimal(0)
    return best, gain


def search(path: ArbPath, state: MarketState, method: str = "auto") -> tuple[Decimal, Decimal]:
    """Optimal input amount and gross revenue for ``path`` on ``state``.

    ``method`` is ``"closed_form"``, ``"golden"`` or ``"auto"`` (closed form when
    every hop is constant-product).
    """
    if method not in ("auto", "closed_form", "golden"):
        raise ValueError(f"unknown search method {method!r}")
    if method == "golden":
        return golden_section_search(path, state)
    try:
        vpool = compose_virtual_pool(path, state)
    except UnsupportedCurve:
        if method == "closed_form":
            raise
        return golden_section_search(path, state)
    amount = floor_amount(optimal_amount(vpool))
    if amount <= 0:
        return Decimal(0), Decimal(0)
    gain = path_revenue(path, state, amount)
    if gain <= 0:
        return Decimal(0), Decimal(0)
    return amount, gain


def execute_strategy(strategy: ArbitrageStrategy, state: MarketState) -> tuple[MarketState, Decimal]:
    """Apply the front-run transactions then the arbitrage; returns (state, base-asset output)."""
    for tx in strategy.t_others:
        state = apply_swap(state, tx.pool_id, tx.input_token, tx.amount_in)
    out, state = simulate_path(strategy.path, state, strategy.amount)
    return state, out


def run_dtoa(
    state: MarketState,
    mempool: Sequence[MempoolTx] = (),
    target=0,
    *,
    base_asset: str = "ETH",
    max_len: int = 4,
    ordering: bool = True,
    max_rounds: int = 256,
) -> StrategySequence:
    """Greedy strategy-sequence search.

    ``target`` is the minimum gross revenue a strategy must strictly exceed.
    ``ordering=False`` searches the raw state only.
    """
    target = to_decimal(target)
    if target < 0:
        raise ValueError("target must be non-negative")
    remaining = sorted(mempool, key=lambda t: (t.observed_ms, t.tx_id))
    ids = [tx.tx_id for tx in remaining]
    if len(set(ids)) != len(ids):
        raise ValueError("mempool contains duplicate tx_id values")
    sequence = StrategySequence()
    for _ in range(max_rounds):
        graph = build_graph(state)
        best: Optional[ArbitrageStrategy] = None
        best_revenue = Decimal(0)
        for path in get_cycles(graph, base_asset, max_len):
            if ordering:
                others, tentative = order_transactions(path, state, remaining)
            else:
                others, tentative = [], state
            amount, revenue = search(path, tentative)
            if revenue > target and revenue > best_revenue:
                best = ArbitrageStrategy(tuple(others), path, amount, revenue)
                best_revenue = revenue
        if best is None:
            break
        sequence.strategies.append(best)
        state, _ = execute_strategy(best, state)
        used = {tx.tx_id for tx in best.t_others}
        remaining = [tx for tx in remaining if tx.tx_id not in used]
    return sequence
