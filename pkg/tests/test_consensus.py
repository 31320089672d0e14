import json
import math
from fractions import Fraction

import pytest

from delayarb.bribery import BribeProposer, BribeValidators, BriberyScenario, Honest, bribed_fraction_threshold
from delayarb.consensus import (
    AttesterView,
    Block,
    CommitteeMix,
    EventTrace,
    SimScenario,
    TraceEvent,
    Vote,
    attest,
    check_slashing,
    fork_choice_head,
    run_scenario,
)
from delayarb.rewards import DomainError, NetworkParams

P = NetworkParams(2048)
SLOT = 12_000


def chain(*links):
    """Blocks from (id, parent, claimed_slot) triples, published at their slot start."""
    return {i: Block(i, parent, slot, slot * SLOT, None) for i, parent, slot in links}


def votes_for(counts):
    out, vid = {}, 0
    for target, n in counts.items():
        for _ in range(n):
            out[vid] = Vote(vid, 1, target, SLOT)
            vid += 1
    return out


def mix(bribed, a=13, b=13):
    return CommitteeMix(a, b, bribed, 64 - a - b - bribed)


class TestForkChoice:
    def test_single_chain(self):
        tree = chain((0, None, 0), (1, 0, 1), (2, 1, 2))
        assert fork_choice_head(tree, {}, 30_000, 2, P) == 2

    def test_boost_decides(self):
        tree = chain((0, None, 0), (1, 0, 1), (2, 0, 2))
        votes = votes_for({1: 20, 2: 10})
        assert fork_choice_head(tree, votes, 2 * SLOT + 4000, 2, P) == 2
        assert fork_choice_head(tree, votes, 2 * SLOT + 4000, 2, P, boost=False) == 1

    def test_late_block_gets_no_boost(self):
        tree = chain((0, None, 0), (1, 0, 1), (2, 0, 2))
        votes = votes_for({1: 20, 2: 10})
        late = {2: 2 * SLOT + 4001}
        assert fork_choice_head(tree, votes, 2 * SLOT + 5000, 2, P, arrival_ms=late) == 1

    def test_tie_goes_to_lower_id(self):
        tree = chain((0, None, 0), (5, 0, 1), (3, 0, 1))
        assert fork_choice_head(tree, votes_for({5: 4, 3: 4}), SLOT, 3, P) == 3

    def test_heaviest_subtree_not_leaf(self):
        tree = chain((0, None, 0), (1, 0, 1), (2, 0, 1), (3, 1, 2), (4, 1, 2))
        assert fork_choice_head(tree, votes_for({2: 5, 3: 3, 4: 3}), 40_000, 5, P) == 3

    def test_empty(self):
        with pytest.raises(DomainError):
            fork_choice_head({}, {}, 0, 0, P)


class TestAttest:
    tree = chain((0, None, 0), (1, 0, 1), (2, 1, 2), (3, 1, 3))
    view = AttesterView(P, 3, 3 * SLOT + 4000, tree, votes_for({2: 13}))
    honest_only = AttesterView(P, 3, 3 * SLOT + 4000, chain((0, None, 0), (1, 0, 1), (3, 1, 3)))

    def test_altruistic_follows_fork_choice(self):
        assert attest(7, "altruistic", self.honest_only, 3 * SLOT + 4000).target == 3
        assert attest(7, "altruistic", self.view, 3 * SLOT + 4000, briber_block=2).target == 3

    def test_bribable_accepts_offer_at_threshold(self):
        vote = attest(7, "bribable_rational", self.view, 3 * SLOT + 4000, briber_block=2, offer=1, threshold=1)
        assert vote.target == 2

    def test_bribable_rejects_low_offer(self):
        vote = attest(7, "bribable_rational", self.view, 3 * SLOT + 4000, briber_block=2, offer=1, threshold=2)
        assert vote.target == 3

    def test_malicious_waits_for_briber_block(self):
        assert attest(7, "malicious_A", self.honest_only, 3 * SLOT + 4000, briber_block=2) is None
        assert attest(7, "malicious_A", self.view, 3 * SLOT + 4000, briber_block=2).target == 2

    def test_competing_adversary_avoids_briber_block(self):
        heavy = AttesterView(P, 3, 3 * SLOT + 4000, self.tree, votes_for({2: 40}))
        assert attest(7, "malicious_B", heavy, 3 * SLOT + 4000, briber_block=2).target == 3
        assert attest(7, "altruistic", heavy, 3 * SLOT + 4000, briber_block=2).target == 2

    def test_before_slot(self):
        with pytest.raises(ValueError):
            attest(7, "altruistic", self.view, 3 * SLOT - 1)


class TestRunScenario:
    def test_enough_bribed(self):
        out = run_scenario(SimScenario(P, mix(13), BribeValidators(1, 13)))
        assert out.attack_succeeded
        assert out.slashing_violations == []

    def test_too_few_bribed(self):
        out = run_scenario(SimScenario(P, mix(11), BribeValidators(1, 11)))
        assert not out.attack_succeeded

    def test_honest(self):
        out = run_scenario(SimScenario(P, mix(0), Honest()))
        assert out.delayed_block is None and not out.attack_succeeded
        kinds = {e.kind for e in out.trace}
        assert "withhold" not in kinds and "dtoa" not in kinds
        proposals = [e for e in out.trace if e.kind == "propose"]
        assert all(e.time_ms == e.slot * SLOT for e in proposals)
        # every simulated slot extends the chain
        assert out.head == proposals[-1].block

    def test_delayed_block_timeline(self):
        out = run_scenario(SimScenario(P, mix(13), BribeValidators(1, 13)), payload_builder=lambda slot: ["s1", "s2"])
        dtoa = [e for e in out.trace if e.kind == "dtoa"]
        assert [(e.time_ms, e.info) for e in dtoa] == [(2 * SLOT + 8000, "strategies=2")]
        published = [e for e in out.trace if e.kind == "propose" and e.block == out.delayed_block]
        assert [(e.time_ms, e.slot, e.info) for e in published] == [(3 * SLOT, 2, "forged_slot")]

    def test_deterministic(self):
        sc = SimScenario(P, mix(12), BribeValidators(1, 12), seed=42)
        a, b = run_scenario(sc), run_scenario(sc)
        assert a.trace.to_json() == b.trace.to_json()
        assert json.dumps(a.to_dict(), sort_keys=True) == json.dumps(b.to_dict(), sort_keys=True)

    def test_threshold_matches_simulation_when_integral(self):
        # A=8: the bribery chain ties the main chain at k=20 and wins on the lower block id
        a, b = 8, 10
        rational = 64 - a - b
        threshold = bribed_fraction_threshold(Fraction(a, 64), Fraction(b, 64)) * rational
        flips = [k for k in range(rational + 1)
                 if run_scenario(SimScenario(P, mix(k, a, b), BribeValidators(1, k), seed=k)).attack_succeeded]
        first = flips[0]
        assert flips == list(range(first, rational + 1))
        assert abs(first - math.ceil(threshold)) <= 1

    @pytest.mark.parametrize("category,fee,succeeds", [
        ("bribable_rational", 10**9, True),
        ("bribable_rational", 10, False),
        ("altruistic", 10**9, False),
        ("malicious_B", 10**9, True),
    ])
    def test_proposer_bribery(self, category, fee, succeeds):
        out = run_scenario(SimScenario(P, mix(0), BribeProposer(fee), next_proposer=category, rho=10**8))
        assert out.attack_succeeded == succeeds
        assert out.slashing_violations == []
        if succeeds:
            late = [e for e in out.trace if e.kind == "propose" and e.slot == 3]
            assert late[0].time_ms == 3 * SLOT + 4001

    def test_adversarial_proposer_needs_contested_profit(self):
        rp = BriberyScenario(P).schedule.R_P
        out = run_scenario(SimScenario(P, mix(0), BribeProposer(rp + 2), next_proposer="malicious_B", rho=10**8))
        assert not out.attack_succeeded

    def test_boost_is_what_stops_the_delayed_block(self):
        sc = SimScenario(P, mix(0), BribeProposer(10**9), next_proposer="altruistic")
        assert not run_scenario(sc).attack_succeeded
        no_boost = SimScenario(P, mix(0), BribeProposer(10**9), next_proposer="altruistic", proposer_boost=False)
        assert run_scenario(no_boost).attack_succeeded

    def test_zero_delay(self):
        out = run_scenario(SimScenario(P, mix(13), BribeValidators(1, 13), message_delay_ms=0))
        assert out.attack_succeeded

    @pytest.mark.parametrize("kwargs", [
        dict(mix=CommitteeMix(13, 13, 13, 13)),
        dict(mix=CommitteeMix(16, 0, 0, 48)),
        dict(message_delay_ms=4001),
        dict(horizon_slots=0),
        dict(horizon_slots=31),
        dict(next_proposer="miner"),
    ])
    def test_invalid(self, kwargs):
        base = dict(params=P, mix=mix(0))
        base.update(kwargs)
        with pytest.raises(DomainError):
            SimScenario(**base)


class TestSlashing:
    def test_double_proposal(self):
        trace = [TraceEvent(0, "propose", 9, 4, 1), TraceEvent(5, "propose", 9, 4, 2)]
        [violation] = check_slashing(trace)
        assert violation.kind == "double_proposal" and violation.blocks == (1, 2)

    def test_double_vote(self):
        trace = [TraceEvent(0, "vote", 3, 4, 1), TraceEvent(9, "vote", 3, 4, 2), TraceEvent(9, "vote", 3, 5, 2)]
        [violation] = check_slashing(trace)
        assert violation.kind == "double_vote" and violation.actor == 3

    def test_repeated_identical_vote_is_fine(self):
        assert check_slashing([TraceEvent(0, "vote", 3, 4, 1), TraceEvent(1, "vote", 3, 4, 1)]) == []

    def test_trace_round_trip(self):
        out = run_scenario(SimScenario(P, mix(13), BribeValidators(1, 13)))
        again = EventTrace.from_list(json.loads(out.trace.to_json()))
        assert again.events == out.trace.events
        assert check_slashing(again) == []
