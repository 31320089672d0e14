"""Constant-product pools, immutable market snapshots and the token price graph.

Amounts live on an 18-fractional-digit grid; swap outputs round toward zero
so that simulated revenue never overstates what the chain would pay out.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping, Optional

from .units import WEI_QUANTUM, exact, floor_amount, to_decimal

MAX_FEE = Decimal("0.1")


class PoolError(ValueError):
    pass


@dataclass(frozen=True)
class LiquidityPool:
    pool_id: str
    token0: str
    token1: str
    reserve0: Decimal
    reserve1: Decimal
    fee: Decimal = Decimal(0)
    venue: str = ""

    is_constant_product = True

    def __post_init__(self):
        object.__setattr__(self, "reserve0", floor_amount(to_decimal(self.reserve0)))
        object.__setattr__(self, "reserve1", floor_amount(to_decimal(self.reserve1)))
        object.__setattr__(self, "fee", to_decimal(self.fee))
        if self.token0 == self.token1:
            raise PoolError(f"{self.pool_id}: token0 and token1 must differ")
        if self.reserve0 <= 0 or self.reserve1 <= 0:
            raise PoolError(f"{self.pool_id}: reserves must be positive")
        if not 0 <= self.fee < MAX_FEE:
            raise PoolError(f"{self.pool_id}: fee must lie in [0, 0.1)")

    @property
    def tokens(self) -> tuple[str, str]:
        return self.token0, self.token1

    def other(self, token: str) -> str:
        if token == self.token0:
            return self.token1
        if token == self.token1:
            return self.token0
        raise PoolError(f"{self.pool_id}: unknown token {token!r}")

    def reserve_of(self, token: str) -> Decimal:
        if token == self.token0:
            return self.reserve0
        if token == self.token1:
            return self.reserve1
        raise PoolError(f"{self.pool_id}: unknown token {token!r}")

    def spot_rate(self, token_in: str) -> Fraction:
        """Units of the other token per unit of ``token_in`` for an infinitesimal trade."""
        return Fraction(self.reserve_of(self.other(token_in))) / Fraction(self.reserve_of(token_in))

    @exact
    def amount_out(self, token_in: str, amount_in) -> Decimal:
        amount_in = to_decimal(amount_in)
        if amount_in < 0:
            raise PoolError("amount_in must be non-negative")
        q_in = self.reserve_of(token_in)
        q_out = self.reserve_of(self.other(token_in))
        if amount_in == 0:
            return Decimal(0)
        effective = (1 - self.fee) * amount_in
        out = floor_amount(q_out * effective / (q_in + effective))
        if out >= q_out:
            out = q_out - WEI_QUANTUM
        return out

    @exact
    def after_swap(self, token_in: str, amount_in) -> tuple["LiquidityPool", Decimal]:
        """New pool and the output amount; the whole input (fee included) stays in the pool."""
        amount_in = floor_amount(to_decimal(amount_in))
        out = self.amount_out(token_in, amount_in)
        if token_in == self.token0:
            pool = dataclasses.replace(self, reserve0=self.reserve0 + amount_in, reserve1=self.reserve1 - out)
        else:
            pool = dataclasses.replace(self, reserve0=self.reserve0 - out, reserve1=self.reserve1 + amount_in)
        return pool, out


def swap_out(pool: LiquidityPool, input_token: str, amount_in) -> Decimal:
    return pool.amount_out(input_token, amount_in)


@dataclass(frozen=True)
class MarketState:
    pools: Mapping[str, LiquidityPool] = field(default_factory=dict)
    version: int = 0

    def __post_init__(self):
        if not isinstance(self.pools, MappingProxyType):
            object.__setattr__(self, "pools", MappingProxyType(dict(self.pools)))

    @classmethod
    def of(cls, pools: Iterable[LiquidityPool]) -> "MarketState":
        table = {}
        for pool in pools:
            if pool.pool_id in table:
                raise PoolError(f"duplicate pool_id {pool.pool_id!r}")
            table[pool.pool_id] = pool
        return cls(table)

    def __getitem__(self, pool_id: str) -> LiquidityPool:
        try:
            return self.pools[pool_id]
        except KeyError:
            raise PoolError(f"unknown pool {pool_id!r}") from None

    def __contains__(self, pool_id) -> bool:
        return pool_id in self.pools

    def tokens(self) -> set[str]:
        return {t for p in self.pools.values() for t in p.tokens}

    def replace(self, pool: LiquidityPool) -> "MarketState":
        table = dict(self.pools)
        table[pool.pool_id] = pool
        return MarketState(table, self.version + 1)

    def restrict(self, pool_ids: Iterable[str]) -> "MarketState":
        keep = set(pool_ids)
        return MarketState({k: v for k, v in self.pools.items() if k in keep}, self.version)


def apply_swap(state: MarketState, pool_id: str, input_token: str, amount_in) -> MarketState:
    pool, _ = state[pool_id].after_swap(input_token, amount_in)
    return state.replace(pool)


def swap_with_output(state: MarketState, pool_id: str, input_token: str, amount_in) -> tuple[MarketState, Decimal]:
    pool, out = state[pool_id].after_swap(input_token, amount_in)
    return state.replace(pool), out


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    weight: Fraction
    pool_id: str


@dataclass
class TokenGraph:
    """Best-price edge per ordered asset pair, plus every parallel pool edge.

    Cycle search walks the parallel edges so that two venues quoting the same
    pair form a two-hop cycle.
    """

    nodes: set[str] = field(default_factory=set)
    edges: dict[tuple[str, str], Edge] = field(default_factory=dict)
    parallel: dict[tuple[str, str], list[Edge]] = field(default_factory=dict)
    _adjacency: dict[str, list[Edge]] = field(default_factory=dict, repr=False, compare=False)

    def weight(self, src: str, dst: str) -> Fraction:
        edge = self.edges.get((src, dst))
        return edge.weight if edge else Fraction(0)

    def out_edges(self, src: str) -> list[Edge]:
        return self._adjacency.get(src, [])

    def _index(self) -> None:
        adjacency: dict[str, list[Edge]] = {}
        for (src, _), edges in self.parallel.items():
            adjacency.setdefault(src, []).extend(edges)
        for edges in adjacency.values():
            edges.sort(key=lambda e: (e.dst, e.pool_id))
        self._adjacency = adjacency


def build_graph(state: MarketState, assets: Optional[Iterable[str]] = None) -> TokenGraph:
    allowed = set(assets) if assets is not None else state.tokens()
    graph = TokenGraph(nodes=set())
    for pool in sorted(state.pools.values(), key=lambda p: p.pool_id):
        if pool.token0 not in allowed or pool.token1 not in allowed:
            continue
        graph.nodes.update(pool.tokens)
        for src in pool.tokens:
            dst = pool.other(src)
            edge = Edge(src, dst, pool.spot_rate(src), pool.pool_id)
            graph.parallel.setdefault((src, dst), []).append(edge)
    for key, edges in graph.parallel.items():
        edges.sort(key=lambda e: (-e.weight, e.pool_id))
        graph.edges[key] = edges[0]
    graph._index()
    return graph
