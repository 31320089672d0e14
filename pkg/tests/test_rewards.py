from decimal import Decimal

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from delayarb.rewards import (
    DomainError,
    NetworkParams,
    RewardSchedule,
    attestation_head_reward,
    base_reward,
    proposer_reward,
    proposer_reward_eth_closed_form,
)
from delayarb.units import GWEI_PER_ETH

mpmath.mp.dps = 50


def oracle_base_reward(N, d=32, p=64):
    return mpmath.mpf(10) ** 9 * p / mpmath.sqrt(mpmath.mpf(N) * d * 10**9)


def rel(a, b):
    return abs(Decimal(a) - Decimal(b)) / abs(Decimal(b))


def test_base_reward_perfect_square():
    assert base_reward(NetworkParams(31_250_000)) == 64


def test_base_reward_matches_mpmath():
    got = base_reward(NetworkParams(600_000))
    assert rel(got, mpmath.nstr(oracle_base_reward(600_000), 40)) < Decimal("1e-30")
    assert round(got, 3) == Decimal("461.880")


def test_zero_base_reward_factor():
    params = NetworkParams(600_000, p=0)
    assert base_reward(params) == 0
    assert attestation_head_reward(params) == 0
    assert proposer_reward(params) == 0


def test_head_reward():
    assert round(attestation_head_reward(NetworkParams(600_000)), 2) == Decimal("3233.16")
    assert attestation_head_reward(NetworkParams(31_250_000)) == 448


def test_proposer_reward_examples():
    assert proposer_reward(NetworkParams(31_250_000)) / GWEI_PER_ETH == Decimal("0.25")
    rp = proposer_reward(NetworkParams(600_000))
    assert round(rp / Decimal("1e7"), 4) == Decimal("3.4641")


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=32, max_value=2**25))
def test_proposer_reward_identity(N):
    got = proposer_reward(NetworkParams(N)) / GWEI_PER_ETH
    oracle = mpmath.sqrt(mpmath.mpf(2 * N) / 10**9)
    assert rel(got, mpmath.nstr(oracle, 40)) < Decimal("1e-9")
    assert rel(got, proposer_reward_eth_closed_form(N)) < Decimal("1e-30")


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=32, max_value=2**25 - 1))
def test_monotonicity(N):
    a, b = NetworkParams(N), NetworkParams(N + 1)
    assert base_reward(b) < base_reward(a)
    assert proposer_reward(b) > proposer_reward(a)


def test_schedule_fields():
    sched = RewardSchedule.from_params(NetworkParams(2048))
    assert sched.R_A == Decimal(7) / 32 * 32 * sched.r
    assert sched.R_A_total == Decimal(27) / 32 * 32 * sched.r


@pytest.mark.parametrize("kwargs", [
    dict(N=0), dict(N=16, S=32), dict(N=2048, d=0), dict(N=2048, p=-1),
    dict(N=2048, boost_fraction=0), dict(N=2048, attest_ms=12_000),
])
def test_invalid_params(kwargs):
    with pytest.raises(DomainError):
        NetworkParams(**kwargs)


def test_committee_size_needs_divisibility():
    assert NetworkParams(2048).committee_size == 64
    with pytest.raises(DomainError):
        NetworkParams(18_358_621).committee_size
    assert NetworkParams(2048).boost_weight == 16
