"""Discrete-event simulation of a one-slot delayed-block bribery attack.

Slots t-1 .. t+horizon are simulated with millisecond resolution.  Votes are
LMD-GHOST latest messages of weight one; a timely block of the current slot
carries the proposer boost.  Message delays are drawn per (message, receiver)
from a keyed hash of the scenario seed, so a run is a pure function of its
scenario.  Members of the same adversary see each other's messages instantly.
"""

from __future__ import annotations

import hashlib
import bisect
import heapq
import json
import random
from collections import Counter
from dataclasses import asdict, dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional

from .bribery import (
    BribeProposer,
    BribeValidators,
    BriberyDecision,
    BriberyScenario,
    Honest,
    min_validator_fee,
    proposer_fee_bound,
)
from .rewards import DomainError, NetworkParams
from .units import to_decimal

CATEGORIES = ("malicious_A", "malicious_B", "bribable_rational", "altruistic")
MAX_DELAY_MS = 4_000
DTOA_OFFSET_MS = 8_000
GENESIS = 0

# action order within one millisecond
_PUBLISH, _DELAYED_VOTE, _PROPOSE, _ATTEST, _DTOA = range(5)


@dataclass(frozen=True)
class CommitteeMix:
    malicious_A: int = 0
    malicious_B: int = 0
    bribable_rational: int = 0
    altruistic: int = 0

    def __post_init__(self):
        if min(self.malicious_A, self.malicious_B, self.bribable_rational, self.altruistic) < 0:
            raise DomainError("category counts must be non-negative")

    @property
    def total(self) -> int:
        return self.malicious_A + self.malicious_B + self.bribable_rational + self.altruistic

    @property
    def rational(self) -> int:
        return self.bribable_rational + self.altruistic

    def count(self, category: str) -> int:
        return getattr(self, category)


@dataclass(frozen=True)
class SimScenario:
    params: NetworkParams
    mix: CommitteeMix
    attack: BriberyDecision = field(default_factory=Honest)
    message_delay_ms: int = MAX_DELAY_MS
    horizon_slots: int = 8
    seed: int = 0
    next_proposer: str = "auto"
    rho: Decimal = Decimal(0)
    proposer_boost: bool = True
    attack_slot: int = 2

    def __post_init__(self):
        object.__setattr__(self, "rho", to_decimal(self.rho))
        m = self.params.committee_size
        if self.mix.total != m:
            raise DomainError(f"category counts sum to {self.mix.total}, committee size is {m}")
        for name in ("malicious_A", "malicious_B"):
            if Fraction(self.mix.count(name), m) >= Fraction(1, 4):
                raise DomainError(f"{name} must control less than a quarter of the committee")
        if not 0 <= self.message_delay_ms <= MAX_DELAY_MS:
            raise DomainError("message delay must lie in [0, 4000] ms")
        if self.message_delay_ms > self.params.attest_ms:
            raise DomainError("message delay cannot exceed the attestation deadline")
        if self.horizon_slots < 1:
            raise DomainError("horizon_slots must be at least 1")
        if self.attack_slot < 2:
            raise DomainError("attack_slot must leave room for slot t-1 after genesis")
        if self.horizon_slots + 2 > self.params.S:
            raise DomainError("simulated slots must fit in one epoch")
        if self.next_proposer != "auto" and self.next_proposer not in CATEGORIES:
            raise DomainError(f"unknown proposer category {self.next_proposer!r}")

    def next_proposer_category(self) -> str:
        if self.next_proposer != "auto":
            return self.next_proposer
        if isinstance(self.attack, BribeProposer):
            return "bribable_rational"
        return "altruistic"


@dataclass(frozen=True)
class Block:
    id: int
    parent: Optional[int]
    claimed_slot: int
    publish_time_ms: int
    producer: Optional[int]
    payload: object = None


@dataclass(frozen=True)
class Vote:
    validator: int
    slot: int
    target: int
    emit_time_ms: int


@dataclass(frozen=True)
class TraceEvent:
    time_ms: int
    kind: str
    actor: Optional[int]
    slot: int
    block: Optional[int] = None
    info: str = ""


@dataclass
class EventTrace:
    events: list[TraceEvent] = field(default_factory=list)

    def add(self, *args, **kwargs) -> None:
        self.events.append(TraceEvent(*args, **kwargs))

    def __iter__(self):
        return iter(self.events)

    def __len__(self):
        return len(self.events)

    def to_list(self) -> list[dict]:
        return [asdict(e) for e in self.events]

    def to_json(self) -> str:
        return json.dumps(self.to_list(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_list(cls, rows: Iterable[Mapping]) -> "EventTrace":
        return cls([TraceEvent(**row) for row in rows])


@dataclass(frozen=True)
class SlashingViolation:
    kind: str
    actor: int
    slot: int
    blocks: tuple[int, ...]


@dataclass
class SimOutcome:
    head: int
    attack_succeeded: bool
    fork_weights: dict[str, int]
    trace: EventTrace
    slashing_violations: list[SlashingViolation]
    delayed_block: Optional[int] = None
    rival_block: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "head": self.head,
            "attack_succeeded": self.attack_succeeded,
            "delayed_block": self.delayed_block,
            "rival_block": self.rival_block,
            "fork_weights": dict(self.fork_weights),
            "slashing_violations": [asdict(v) for v in self.slashing_violations],
            "trace": self.trace.to_list(),
        }


def _children(blocks: Mapping[int, Block]) -> dict[int, list[int]]:
    kids: dict[int, list[int]] = {b: [] for b in blocks}
    for b in blocks.values():
        if b.parent is not None and b.parent in blocks:
            kids[b.parent].append(b.id)
    for v in kids.values():
        v.sort()
    return kids


def _subtree_weights(blocks, kids, root, direct: Mapping[int, Fraction]) -> dict[int, Fraction]:
    weights: dict[int, Fraction] = {}
    order, stack = [], [root]
    while stack:
        b = stack.pop()
        order.append(b)
        stack.extend(kids[b])
    for b in reversed(order):
        weights[b] = Fraction(direct.get(b, 0)) + sum((weights[c] for c in kids[b]), Fraction(0))
    return weights


def _root(blocks: Mapping[int, Block]) -> int:
    roots = sorted(b.id for b in blocks.values() if b.parent is None or b.parent not in blocks)
    if not roots:
        raise DomainError("block tree has no root")
    return roots[0]


def _ghost(blocks: Mapping[int, Block], direct: Mapping[int, Fraction]) -> int:
    if not blocks:
        raise DomainError("empty block tree")
    kids = _children(blocks)
    root = _root(blocks)
    weights = _subtree_weights(blocks, kids, root, direct)
    head = root
    while kids[head]:
        head = min(kids[head], key=lambda c: (-weights[c], c))
    return head


def fork_choice_head(
    block_tree: Mapping[int, Block],
    latest_votes: Mapping[int, Vote],
    now_ms: int,
    current_slot: int,
    params: NetworkParams,
    arrival_ms: Optional[Mapping[int, int]] = None,
    boost: bool = True,
) -> int:
    """LMD-GHOST head with proposer boost; ties go to the smaller block id.

    ``arrival_ms`` gives when the viewer received each block (defaults to its
    publish time).  A block claiming ``current_slot`` that arrived within the
    first ``attest_ms`` of that slot (inclusive) gets the boost weight.
    """
    direct: Counter = Counter()
    for vote in latest_votes.values():
        if vote.target in block_tree:
            direct[vote.target] += 1
    direct = {k: Fraction(v) for k, v in direct.items()}
    if boost:
        boosted = _boosted_block(block_tree, now_ms, current_slot, params, arrival_ms)
        if boosted is not None:
            direct[boosted] = direct.get(boosted, Fraction(0)) + params.boost_weight
    return _ghost(block_tree, direct)


def _boosted_block(blocks, now_ms, current_slot, params, arrival_ms) -> Optional[int]:
    deadline = current_slot * params.slot_ms + params.attest_ms
    timely = []
    for b in blocks.values():
        if b.claimed_slot != current_slot:
            continue
        arrived = arrival_ms.get(b.id, b.publish_time_ms) if arrival_ms else b.publish_time_ms
        if arrived <= deadline and arrived <= now_ms:
            timely.append((arrived, b.id))
    return min(timely)[1] if timely else None


def is_ancestor(blocks: Mapping[int, Block], ancestor: int, block: Optional[int]) -> bool:
    while block is not None:
        if block == ancestor:
            return True
        block = blocks[block].parent if block in blocks else None
    return False


def _without_subtree(blocks: Mapping[int, Block], root: Optional[int]) -> dict[int, Block]:
    if root is None:
        return dict(blocks)
    return {k: b for k, b in blocks.items() if not is_ancestor(blocks, root, k)}


@dataclass(frozen=True)
class AttesterView:
    """What one validator has received by ``now_ms``."""

    params: NetworkParams
    slot: int
    now_ms: int
    blocks: Mapping[int, Block]
    latest_votes: Mapping[int, Vote] = field(default_factory=dict)
    arrival_ms: Optional[Mapping[int, int]] = None
    boost: bool = True

    def has_block(self, block_id: Optional[int]) -> bool:
        return block_id in self.blocks

    def head(self, exclude: Optional[int] = None) -> int:
        blocks = _without_subtree(self.blocks, exclude)
        return fork_choice_head(blocks, self.latest_votes, self.now_ms, self.slot, self.params, self.arrival_ms, self.boost)


def attest(
    validator: int,
    category: str,
    view,
    time_ms: int,
    *,
    briber_block: Optional[int] = None,
    offer=None,
    threshold=None,
) -> Optional[Vote]:
    """The vote ``validator`` casts at ``time_ms``, or None while it waits for the briber's block.

    ``briber_block`` is set only while an attack on this slot is under way.
    A bribable validator follows the bribe when ``offer >= threshold``.
    """
    if time_ms < view.slot * view.params.slot_ms:
        raise ValueError("cannot attest before the slot starts")
    if category not in CATEGORIES:
        raise ValueError(f"unknown validator category {category!r}")
    target = None
    if briber_block is not None:
        if category == "malicious_A":
            if not view.has_block(briber_block):
                return None
            target = briber_block
        elif category == "malicious_B":
            target = view.head(exclude=briber_block)
        elif category == "bribable_rational" and offer is not None and threshold is not None:
            if view.has_block(briber_block) and to_decimal(offer) >= to_decimal(threshold):
                target = briber_block
    if target is None:
        target = view.head()
    return Vote(validator, view.slot, target, time_ms)


def check_slashing(trace: Iterable[TraceEvent]) -> list[SlashingViolation]:
    """Equivocations: two blocks by one proposer for one slot, or two votes by one validator for one slot."""
    proposals: dict[tuple[int, int], list[int]] = {}
    votes: dict[tuple[int, int], list[int]] = {}
    for ev in trace:
        if ev.kind == "propose":
            bucket = proposals.setdefault((ev.actor, ev.slot), [])
        elif ev.kind == "vote":
            bucket = votes.setdefault((ev.actor, ev.slot), [])
        else:
            continue
        if ev.block not in bucket:
            bucket.append(ev.block)
    found = []
    for kind, table in (("double_proposal", proposals), ("double_vote", votes)):
        for (actor, slot), blocks in sorted(table.items()):
            if len(blocks) > 1:
                found.append(SlashingViolation(kind, actor, slot, tuple(blocks)))
    return found


class _Simulation:
    def __init__(self, scenario: SimScenario, payload_builder=None):
        self.sc = scenario
        self.params = scenario.params
        self.M = scenario.params.committee_size
        self.t = scenario.attack_slot
        self.first_slot = self.t - 1
        self.last_slot = self.t + scenario.horizon_slots
        self.D = scenario.message_delay_ms
        self.payload_builder = payload_builder
        self.attacking = not isinstance(scenario.attack, Honest)

        self.blocks: dict[int, Block] = {GENESIS: Block(GENESIS, None, 0, 0, None)}
        self.sender: dict[int, Optional[int]] = {GENESIS: None}
        self.votes: list[Vote] = []
        self._emit_times: list[int] = []
        self._settled_cache: dict[int, dict[int, Vote]] = {}
        self.trace = EventTrace()
        self.next_id = 1
        self.queue: list = []
        self.seq = 0

        self.category: dict[int, str] = {}
        self.committee: dict[int, list[int]] = {}
        self.proposer: dict[int, int] = {}
        self._assign_roles()

        self.delayed_block: Optional[int] = None
        self.rival_block: Optional[int] = None
        self._fee_cache: dict = {}
        self._head_cache: dict = {}

    # -- roles -------------------------------------------------------------
    def _assign_roles(self) -> None:
        mix = self.sc.mix
        for s in range(self.first_slot, self.last_slot + 1):
            roles = [c for c in CATEGORIES for _ in range(mix.count(c))]
            random.Random(f"{self.sc.seed}|committee|{s}").shuffle(roles)
            base = (s % self.params.S) * self.M
            members = list(range(base, base + self.M))
            for v, role in zip(members, roles):
                self.category[v] = role
            self.committee[s] = members
            pid = self.params.N + s
            self.proposer[s] = pid
            if s == self.t:
                self.category[pid] = "malicious_A"
            elif s == self.t + 1:
                self.category[pid] = self.sc.next_proposer_category()
            else:
                self.category[pid] = "altruistic"

    def _group(self, v: Optional[int]) -> Optional[str]:
        cat = self.category.get(v)
        return cat if cat in ("malicious_A", "malicious_B") else None

    # -- network -----------------------------------------------------------
    def _delay(self, key: str, sender: Optional[int], receiver: int) -> int:
        if sender == receiver:
            return 0
        g = self._group(sender)
        if g is not None and g == self._group(receiver):
            return 0
        if self.D == 0:
            return 0
        digest = hashlib.blake2b(f"{self.sc.seed}|{key}|{receiver}".encode(), digest_size=8).digest()
        return int.from_bytes(digest, "big") % (self.D + 1)

    def _arrival_block(self, block: Block, viewer: int) -> int:
        if block.id == GENESIS:
            return 0
        return block.publish_time_ms + self._delay(f"b{block.id}", self.sender[block.id], viewer)

    def _arrival_vote(self, vote: Vote, viewer: int) -> int:
        return vote.emit_time_ms + self._delay(f"v{vote.validator}:{vote.slot}", vote.validator, viewer)

    @staticmethod
    def _seen(arrival: int, now: int, strict: bool) -> bool:
        return arrival < now if strict else arrival <= now

    def _view(self, viewer: int, now: int, strict: bool):
        """Blocks, their arrival times and the latest votes visible to ``viewer``.

        Votes emitted at least ``D`` ms ago have reached everyone; only the
        in-flight remainder needs per-viewer delays.
        """
        blocks, arrivals = {}, {}
        for b in self.blocks.values():
            a = self._arrival_block(b, viewer)
            if self._seen(a, now, strict):
                blocks[b.id] = b
                arrivals[b.id] = a
        find = bisect.bisect_left if strict else bisect.bisect_right
        cut = find(self._emit_times, now - self.D)
        latest = self._settled_latest(cut)
        recent = []
        for vote in self.votes[cut:]:
            if self._seen(self._arrival_vote(vote, viewer), now, strict):
                recent.append(vote)
        if recent:
            latest = dict(latest)
            self._merge_latest(latest, recent)
        return blocks, arrivals, latest, tuple((v.validator, v.slot) for v in recent)

    def _settled_latest(self, cut: int) -> dict[int, Vote]:
        if cut not in self._settled_cache:
            latest: dict[int, Vote] = {}
            self._merge_latest(latest, self.votes[:cut])
            self._settled_cache[cut] = latest
        return self._settled_cache[cut]

    @staticmethod
    def _merge_latest(latest: dict[int, Vote], votes: Iterable[Vote]) -> dict[int, Vote]:
        for vote in votes:
            prev = latest.get(vote.validator)
            if prev is None or vote.slot > prev.slot:
                latest[vote.validator] = vote
        return latest

    def head(self, viewer: int, now: int, slot: int, strict: bool = False, exclude: Optional[int] = None) -> int:
        blocks, arrivals, latest, recent = self._view(viewer, now, strict)
        if exclude is not None:
            blocks = {k: b for k, b in blocks.items() if not is_ancestor(self.blocks, exclude, k)}
        boosted = None
        if self.sc.proposer_boost:
            boosted = _boosted_block(blocks, now, slot, self.params, arrivals)
        key = (now, strict, exclude, tuple(sorted(blocks)), boosted, recent)
        cached = self._head_cache.get(key)
        if cached is not None:
            return cached
        direct: dict[int, Fraction] = {}
        for vote in latest.values():
            if vote.target in blocks:
                direct[vote.target] = direct.get(vote.target, 0) + 1
        if boosted is not None:
            direct[boosted] = direct.get(boosted, 0) + self.params.boost_weight
        result = _ghost(blocks, direct)
        self._head_cache[key] = result
        return result

    # -- events ------------------------------------------------------------
    def schedule(self, time_ms: int, order: int, action: str, *args) -> None:
        heapq.heappush(self.queue, (time_ms, order, self.seq, action, args))
        self.seq += 1

    def slot_start(self, s: int) -> int:
        return s * self.params.slot_ms

    def run(self) -> SimOutcome:
        for s in range(self.first_slot, self.last_slot + 1):
            self.schedule(self.slot_start(s), _PROPOSE, "propose", s)
            self.schedule(self.slot_start(s) + self.params.attest_ms, _ATTEST, "attest", s)
        while self.queue:
            time_ms, _, _, action, args = heapq.heappop(self.queue)
            getattr(self, f"_on_{action}")(time_ms, *args)
        return self._outcome()

    def _new_block(self, parent: int, claimed_slot: int, publish_ms: int, producer: int, payload=None) -> Block:
        block = Block(self.next_id, parent, claimed_slot, publish_ms, producer, payload)
        self.next_id += 1
        return block

    def _on_propose(self, now: int, s: int) -> None:
        pid = self.proposer[s]
        if s == self.t and self.attacking:
            self.trace.add(now, "withhold", pid, s)
            self.schedule(now + DTOA_OFFSET_MS, _DTOA, "dtoa", s)
            return
        if s == self.t + 1 and isinstance(self.sc.attack, BribeProposer) and self._proposer_accepts():
            self.trace.add(now, "accept_bribe", pid, s, info="proposer")
            late = now + self.params.attest_ms + 1
            self.schedule(late, _PROPOSE, "late_propose", s)
            return
        parent = self.head(pid, now, s, strict=True)
        block = self._new_block(parent, s, now, pid)
        if s == self.t + 1:
            self.rival_block = block.id
        self._publish(now, block)

    def _on_late_propose(self, now: int, s: int) -> None:
        pid = self.proposer[s]
        parent = self.head(pid, now, s)
        block = self._new_block(parent, s, now, pid)
        self.rival_block = block.id
        self._publish(now, block)

    def _proposer_accepts(self) -> bool:
        attack = self.sc.attack
        category = self.category[self.proposer[self.t + 1]]
        if category not in ("bribable_rational", "malicious_B"):
            return False
        scenario = self._bribery_view()
        bound = proposer_fee_bound(scenario, adversarial=category == "malicious_B")
        return to_decimal(attack.fee) >= bound

    def _on_dtoa(self, now: int, s: int) -> None:
        pid = self.proposer[s]
        payload = self.payload_builder(s) if self.payload_builder else None
        self.trace.add(now, "dtoa", pid, s, info=_payload_info(payload))
        parent = self.head(pid, now, s)
        publish_ms = self.slot_start(s + 1)
        block = self._new_block(parent, s, publish_ms, pid, payload)
        self.delayed_block = block.id
        self.schedule(publish_ms, _PUBLISH, "publish", block)

    def _on_publish(self, now: int, block: Block) -> None:
        self._publish(now, block)
        if block.id == self.delayed_block:
            self.schedule(now, _DELAYED_VOTE, "delayed_vote", self.t)

    def _publish(self, now: int, block: Block) -> None:
        self.blocks[block.id] = block
        self.sender[block.id] = block.producer
        info = "forged_slot" if block.claimed_slot < now // self.params.slot_ms else ""
        self.trace.add(now, "propose", block.producer, block.claimed_slot, block.id, info)

    def _on_delayed_vote(self, now: int, s: int) -> None:
        batch = [Vote(v, s, self.delayed_block, now) for v in self.committee[s] if self.category[v] == "malicious_A"]
        self._emit(batch, "delayed")

    def _on_attest(self, now: int, s: int) -> None:
        batch, info = [], {}
        attacked = self.attacking and s in (self.t, self.t + 1)
        bribing = self.attacking and s == self.t + 1 and isinstance(self.sc.attack, BribeValidators)
        for v in self.committee[s]:
            cat = self.category[v]
            if self.attacking and s == self.t and cat == "malicious_A":
                continue  # block n does not exist yet; these votes follow its publication
            offer = threshold = None
            if bribing and cat == "bribable_rational":
                offer = self.sc.attack.fee_per_validator
                threshold = self._bribe_threshold(v, now)
            view = _SimView(self, v, s, now)
            vote = attest(v, cat, view, now, briber_block=self.delayed_block if attacked else None,
                          offer=offer, threshold=threshold)
            if vote is None:
                continue
            if attacked and vote.target == self.delayed_block:
                info[v] = {"malicious_A": "colluding", "bribable_rational": "bribed"}.get(cat, "")
            elif attacked and cat == "malicious_B":
                info[v] = "competing"
            batch.append(vote)
        self._emit(batch, info)

    def _emit(self, batch: list[Vote], info) -> None:
        for vote in batch:
            note = info if isinstance(info, str) else info.get(vote.validator, "")
            self.trace.add(vote.emit_time_ms, "vote", vote.validator, vote.slot, vote.target, note)
        self.votes.extend(batch)
        self._emit_times.extend(v.emit_time_ms for v in batch)

    def _bribery_view(self, W_a=0, W_v=0) -> BriberyScenario:
        mix = self.sc.mix
        return BriberyScenario(
            params=self.params,
            alpha_A=Fraction(mix.malicious_A, self.M),
            alpha_B=Fraction(mix.malicious_B, self.M),
            W_a=W_a,
            W_v=W_v,
            rho=self.sc.rho,
        )

    def _bribe_threshold(self, v: int, now: int) -> Optional[Decimal]:
        """Minimal acceptable fee given the fork weights ``v`` currently sees."""
        blocks, _, latest, _ = self._view(v, now, strict=False)
        n = self.delayed_block
        if n not in blocks:
            return None
        parent = blocks[n].parent
        W_a = W_v = 0
        for vote in latest.values():
            if vote.target not in blocks:
                continue
            if is_ancestor(blocks, n, vote.target):
                W_a += 1
            elif vote.target != parent and is_ancestor(blocks, parent, vote.target):
                W_v += 1
        competitor = self.category[self.proposer[self.t + 1]] == "malicious_B"
        key = (W_a, W_v, competitor)
        if key not in self._fee_cache:
            self._fee_cache[key] = min_validator_fee(self._bribery_view(W_a, W_v), competitor)
        return self._fee_cache[key]

    def _outcome(self) -> SimOutcome:
        end = self.slot_start(self.last_slot + 1)
        latest = self._merge_latest({}, self.votes)
        head = fork_choice_head(self.blocks, latest, end, self.last_slot + 1, self.params, boost=False)
        direct: dict[int, Fraction] = {}
        for vote in latest.values():
            direct[vote.target] = direct.get(vote.target, Fraction(0)) + 1
        kids = _children(self.blocks)
        weights = _subtree_weights(self.blocks, kids, GENESIS, direct)
        fork_weights = {"bribery": 0, "main": 0}
        n = self.delayed_block
        if n is not None:
            fork_weights["bribery"] = int(weights[n])
            parent = self.blocks[n].parent
            fork_weights["main"] = int(sum(weights[c] for c in kids[parent] if c != n))
        succeeded = n is not None and is_ancestor(self.blocks, n, head)
        return SimOutcome(
            head=head,
            attack_succeeded=succeeded,
            fork_weights=fork_weights,
            trace=self.trace,
            slashing_violations=check_slashing(self.trace),
            delayed_block=n,
            rival_block=self.rival_block,
        )


class _SimView:
    """Adapter giving :func:`attest` the simulator's cached fork choice."""

    def __init__(self, sim: _Simulation, viewer: int, slot: int, now: int):
        self.sim, self.viewer, self.slot, self.now = sim, viewer, slot, now
        self.params = sim.params

    def has_block(self, block_id: Optional[int]) -> bool:
        if block_id not in self.sim.blocks:
            return False
        return self.sim._arrival_block(self.sim.blocks[block_id], self.viewer) <= self.now

    def head(self, exclude: Optional[int] = None) -> int:
        return self.sim.head(self.viewer, self.now, self.slot, exclude=exclude)


def _payload_info(payload) -> str:
    if payload is None:
        return ""
    try:
        return f"strategies={len(payload)}"
    except TypeError:
        return "payload"


def run_scenario(scenario: SimScenario, payload_builder: Optional[Callable[[int], object]] = None) -> SimOutcome:
    """Simulate the configured attack and report whether the delayed block ends up canonical.

    ``payload_builder(slot)`` is called at the 8th second of the attacked slot and
    its result is carried in the delayed block.
    """
    return _Simulation(scenario, payload_builder).run()
