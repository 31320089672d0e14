from __future__ import annotations

import random
from decimal import Decimal, localcontext
from pathlib import Path

import pytest

from delayarb.amm import LiquidityPool, MarketState
from delayarb.dtoa import ArbPath, MempoolTx
from delayarb.units import CONTEXT

FIXTURES = Path(__file__).parent / "fixtures"


def triangle_state() -> MarketState:
    """A->B at 0.1, B->C at 10, C->A at 1: a cycle with rate product exactly 1."""
    return MarketState.of([
        LiquidityPool("AB", "A", "B", 10**9, 10**8),
        LiquidityPool("BC", "B", "C", 10**8, 10**9),
        LiquidityPool("CA", "C", "A", 10**9, 10**9),
    ])


def triangle_tx() -> MempoolTx:
    """Sells C into the B/C pool, lifting the B->C rate from 10 to 12."""
    with localcontext(CONTEXT):
        amount = Decimal("1.2e18").sqrt() - Decimal(10**9)
    return MempoolTx("t1", 1_000, "BC", "C", amount)


TRIANGLE_PATH = ArbPath(("A", "B", "C", "A"), ("AB", "BC", "CA"))


def random_cycle(rng: random.Random, hops: int, fees=(Decimal(0), Decimal("0.003"), Decimal("0.01"))):
    """Random CPMM cycle through ETH with reserves in [10, 1e6]."""
    assets = ["ETH"] + [f"T{i}" for i in range(1, hops)] + ["ETH"]
    pools = []
    for i in range(hops):
        r0 = Decimal(str(round(10 ** rng.uniform(1, 6), 6)))
        r1 = Decimal(str(round(10 ** rng.uniform(1, 6), 6)))
        pools.append(LiquidityPool(f"p{i}", assets[i], assets[i + 1], r0, r1, rng.choice(fees)))
    return ArbPath(tuple(assets), tuple(p.pool_id for p in pools)), MarketState.of(pools)


@pytest.fixture(autouse=True)
def package_precision():
    """Test-side Decimal arithmetic runs at the package precision."""
    with localcontext(CONTEXT):
        yield


@pytest.fixture
def triangle():
    return triangle_state(), triangle_tx()
