"""Acceptance suite: one PASS/FAIL line per criterion, each within its runtime limit.

Run with ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import random
import sys
import time
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path
from typing import Callable

import mpmath
import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))
from conftest import TRIANGLE_PATH, FIXTURES, triangle_state, triangle_tx, random_cycle  # noqa: E402

from delayarb.amm import apply_swap
from delayarb.bribery import (
    BribeProposer,
    BribeValidators,
    BriberyScenario,
    bribed_fraction_threshold,
    bribery_cost_proposer,
    validator_advantage_limit,
    validator_cost_closed_form,
)
from delayarb.consensus import CommitteeMix, SimScenario, check_slashing, run_scenario
from delayarb.dtoa import path_revenue, path_weight, run_dtoa, search
from delayarb.fixtures import load_mempool, load_scenario, load_snapshots
from delayarb.replay import pbs_expected_profit, pbs_simulate, replay, standard_error
from delayarb.rewards import NetworkParams, proposer_reward
from delayarb.units import CONTEXT, gwei_to_eth


@dataclass(frozen=True)
class Criterion:
    number: int
    title: str
    limit_s: float
    check: Callable[[], tuple[bool, str]]


CRITERIA: list[Criterion] = []


def criterion(number: int, title: str, limit_s: float):
    def register(fn):
        CRITERIA.append(Criterion(number, title, limit_s, fn))
        return fn
    return register


def evaluate(c: Criterion) -> tuple[bool, str]:
    start = time.perf_counter()
    with localcontext(CONTEXT):
        ok, detail = c.check()
    elapsed = time.perf_counter() - start
    in_time = elapsed < c.limit_s
    status = "PASS" if ok and in_time else "FAIL"
    timing = f"{elapsed:.2f}s < {c.limit_s:g}s" if in_time else f"{elapsed:.2f}s exceeds {c.limit_s:g}s"
    return ok and in_time, f"{status} criterion {c.number} ({c.title}): {detail} [{timing}]"


# -- 1 ---------------------------------------------------------------------

@criterion(1, "proposer reward identity", 1)
def reward_identity():
    mpmath.mp.dps = 50
    worst = mpmath.mpf(0)
    for N in (2048, 600_000, 18_358_621):
        got = mpmath.mpf(str(gwei_to_eth(proposer_reward(NetworkParams(N)))))
        oracle = mpmath.sqrt(2 * mpmath.mpf(N) / 10**9)
        worst = max(worst, abs(got - oracle) / oracle)
    return worst < 1e-9, f"max relative error {mpmath.nstr(worst, 3)} (tolerance 1e-9)"


# -- 2 ---------------------------------------------------------------------

@criterion(2, "validator bribery is cheaper and its size limit", 5)
def validator_advantage():
    params = NetworkParams(600_000)
    grid = np.linspace(0.001, 0.249, 50)
    losses = 0
    for a in grid:
        for b in grid:
            sc = BriberyScenario.canonical(params, str(a), str(b))
            losses += not validator_cost_closed_form(sc) < bribery_cost_proposer(sc).total_cost
    root = validator_advantage_limit()
    mpmath.mp.dps = 40
    f = lambda n: -0.75 * mpmath.sqrt(2 * n / mpmath.mpf(10) ** 9) + (n - 64) / 64 * mpmath.mpf("5.01e-7")
    oracle = mpmath.findroot(f, 1.8e7)
    ok = losses == 0 and abs(root - 18_358_621) <= 1 and abs(float(root) - float(oracle)) < 1e-3
    return ok, f"{2500 - losses}/2500 grid points cheaper via validators; root {root:.1f} (expected 18358621 +/- 1)"


# -- 3 ---------------------------------------------------------------------

@criterion(3, "bribed-fraction threshold matches simulation", 30)
def threshold_sweep():
    a = b = 13
    rational = 64 - a - b
    expected = math.ceil(bribed_fraction_threshold(Fraction(a, 64), Fraction(b, 64)) * rational)
    outcomes, violations = [], 0
    for k in range(rational + 1):
        mix = CommitteeMix(a, b, k, rational - k)
        out = run_scenario(SimScenario(NetworkParams(2048), mix, BribeValidators(1, k), seed=k))
        outcomes.append(out.attack_succeeded)
        violations += len(out.slashing_violations)
    flip = outcomes.index(True) if True in outcomes else None
    monotone = flip is not None and outcomes == [False] * flip + [True] * (rational + 1 - flip)
    ok = monotone and abs(flip - expected) <= 1 and violations == 0
    return ok, f"success from {flip} bribed (threshold ceiling {expected}), monotone={monotone}"


# -- 4 ---------------------------------------------------------------------

def float_revenue(path, state, x: float) -> float:
    for asset, pool_id in path.steps():
        pool = state[pool_id]
        q_in, q_out = float(pool.reserve_of(asset)), float(pool.reserve_of(pool.other(asset)))
        eff = (1 - float(pool.fee)) * x
        x = q_out * eff / (q_in + eff)
    return x


def exact_revenue(path, state, amount: Fraction) -> Fraction:
    start = amount
    for asset, pool_id in path.steps():
        pool = state[pool_id]
        q_in, q_out = Fraction(pool.reserve_of(asset)), Fraction(pool.reserve_of(pool.other(asset)))
        eff = (1 - Fraction(pool.fee)) * amount
        amount = q_out * eff / (q_in + eff)
    return amount - start


def net_rate(path, state) -> Fraction:
    """Marginal rate product after fees."""
    rate = path_weight(path, state)
    for pool_id in path.pools:
        rate *= 1 - Fraction(state[pool_id].fee)
    return rate


def grid_argmax(path, state, points: int = 10_000) -> float:
    """Geometric grid up to where the trade stops paying, so spacing is relative (about 0.2%)."""
    hi = 1e-9 * float(state[path.pools[0]].reserve_of(path.assets[0]))
    while float_revenue(path, state, hi) - hi > 0:
        hi *= 2
    xs = np.geomspace(hi * 1e-9, hi, points)
    profits = [float_revenue(path, state, x) - x for x in xs]
    return float(xs[int(np.argmax(profits))])


@criterion(4, "closed-form optimal input vs grid search", 60)
def optimizer():
    rng = random.Random(2024)
    cycles, worst, local_max = 0, 0.0, True
    while cycles < 100:
        path, state = random_cycle(rng, rng.choice([2, 3]))
        if path_weight(path, state) < 1:
            path = path.inverse()
        # skip near break-even cycles where float noise swamps the flat profit curve
        if net_rate(path, state) < Fraction(1001, 1000):
            continue
        amount, _ = search(path, state, "closed_form")
        best = grid_argmax(path, state)
        worst = max(worst, abs(float(amount) - best) / float(amount))
        x = Fraction(amount)
        centre = exact_revenue(path, state, x)
        local_max &= centre >= exact_revenue(path, state, x * Fraction(99, 100))
        local_max &= centre >= exact_revenue(path, state, x * Fraction(101, 100))
        cycles += 1
    return worst <= 0.005 and local_max, f"100 cycles, worst deviation {worst:.3%} (tolerance 0.5%), local maximum={local_max}"


# -- 5 ---------------------------------------------------------------------

@criterion(5, "pending-transaction ordering unlocks the triangle", 5)
def motivating_example():
    state, tx = triangle_state(), triangle_tx()
    seq = run_dtoa(state, [tx], base_asset="A")
    ordered = len(seq) == 1 and seq[0].t_others == (tx,) and seq[0].path == TRIANGLE_PATH
    per_unit = path_revenue(TRIANGLE_PATH, apply_swap(state, tx.pool_id, tx.input_token, tx.amount_in), 1)
    within = abs(per_unit - Decimal("0.2")) <= Decimal("0.002")
    unordered = run_dtoa(state, [tx], base_asset="A", ordering=False).total_revenue
    ok = ordered and within and unordered == 0
    return ok, f"profit per unit {per_unit:.6f} (expected 0.2 +/- 1%), without ordering {unordered}"


# -- 6 ---------------------------------------------------------------------

@criterion(6, "exactly one direction of a cycle is profitable", 5)
def inverse_paths():
    rng = random.Random(6)
    checked = agree = 0
    while checked < 1000:
        path, state = random_cycle(rng, rng.choice([2, 3, 4]), fees=(Decimal(0),))
        fwd, back = path_weight(path, state), path_weight(path.inverse(), state)
        if fwd == 1:
            continue
        checked += 1
        agree += (fwd > 1) != (back > 1)
    return agree == checked, f"{agree}/{checked} cycles have exactly one profitable direction"


# -- 7 ---------------------------------------------------------------------

def random_attack(rng: random.Random) -> SimScenario:
    a, b = rng.randint(0, 15), rng.randint(0, 15)
    rational = 64 - a - b
    common = dict(message_delay_ms=rng.randint(0, 4000), horizon_slots=rng.randint(2, 8), seed=rng.getrandbits(64))
    if rng.random() < 0.7:
        need = math.ceil(bribed_fraction_threshold(Fraction(a, 64), Fraction(b, 64)) * rational)
        k = rng.randint(need, rational)
        return SimScenario(NetworkParams(2048), CommitteeMix(a, b, k, rational - k), BribeValidators(1, k), **common)
    k = rng.randint(0, rational)
    proposer = rng.choice(["bribable_rational", "malicious_B"])
    return SimScenario(NetworkParams(2048), CommitteeMix(a, b, k, rational - k), BribeProposer(10**9),
                       next_proposer=proposer, rho=10**8, **common)


@criterion(7, "successful attacks never trip slashing rules", 60)
def slashing_freedom():
    rng = random.Random(7)
    successes = attempts = flagged = 0
    while successes < 1000 and attempts < 3000:
        attempts += 1
        out = run_scenario(random_attack(rng))
        if out.attack_succeeded:
            successes += 1
            flagged += bool(check_slashing(out.trace))
    ok = successes == 1000 and flagged == 0
    return ok, f"{successes} successful attacks out of {attempts} runs, {flagged} with slashable events"


# -- 8 ---------------------------------------------------------------------

@criterion(8, "random builder ordering", 30)
def pbs():
    state = triangle_state()
    strategy = run_dtoa(state, [triangle_tx()], base_asset="A")[0]
    expected = pbs_expected_profit(strategy, state)
    summary = pbs_simulate(strategy, state, 10_000, seed=8)
    gap = abs(float(summary.mean - expected))
    sigma = standard_error(summary)
    ok = gap <= 3 * sigma and expected <= summary.controlled and summary.mean <= summary.controlled
    return ok, (f"enumerated mean {float(expected):.6g}, sampled {float(summary.mean):.6g} "
                f"(|gap| {gap:.3g} <= 3 sigma {3 * sigma:.3g}), controlled {float(summary.controlled):.6g}")


# -- 9 ---------------------------------------------------------------------

@criterion(9, "synthetic known-answer replay", 10)
def known_answer_replay():
    base = FIXTURES / "replay"
    report = replay(load_snapshots(base / "snapshots"), load_mempool(base / "mempool.jsonl"), load_scenario(base / "scenario.json"))
    match = report.to_csv() == (base / "expected_report.csv").read_text()
    note = ("mainnet-scale profit figures need historical order flow that is not available here "
            "and are not reproduced; ")
    return match, note + f"report {'matches' if match else 'differs from'} the hand-computed answer exactly"


@pytest.mark.parametrize("c", CRITERIA, ids=[f"criterion_{c.number}" for c in CRITERIA])
def test_criterion(c: Criterion, capsys):
    ok, line = evaluate(c)
    with capsys.disabled():
        print(f"\n{line}")
    assert ok, line


if __name__ == "__main__":
    results = [evaluate(c) for c in CRITERIA]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
