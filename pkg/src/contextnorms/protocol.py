"""Decision histories exchanged along role-pair links and cycle feedback."""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Mapping

from .errors import ProtocolError
from .games import GameSuite
from .semantics import Decision
from .society import RolePairLink, Society, role_pair_links

MAX_HOPS = 3

AgentRole = tuple[int, str]
UnitKey = tuple[int, str, str]


class Feedback(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    NONE = "none"


class HopLimitExceeded(ProtocolError):
    pass


@dataclass(frozen=True)
class DecisionRecord:
    origin: AgentRole
    addressee: AgentRole
    period: str
    corr_pair: tuple[str, str]

    def __post_init__(self):
        if self.corr_pair[0] != self.period:
            raise ProtocolError(f"record pair {self.corr_pair} does not start at {self.period}")

    @classmethod
    def from_decision(cls, d: Decision, addressee: AgentRole) -> "DecisionRecord":
        return cls(d.owner, addressee, d.period, d.corr_pair)

    def __str__(self):
        (i, k), (j, m) = self.origin, self.addressee
        p, x = self.corr_pair
        return f"{i}:{k}->{j}:{m} {self.period} <{p},{x}>"


@dataclass(frozen=True)
class CHistory:
    records: tuple[DecisionRecord, ...] = ()

    def __len__(self):
        return len(self.records)

    @property
    def head(self) -> DecisionRecord | None:
        return self.records[0] if self.records else None


def head_history(d: DecisionRecord, prior: CHistory = CHistory()) -> CHistory:
    """Prepend ``d`` to ``prior``; refuses to grow past the hop cap."""
    if len(prior) >= MAX_HOPS:
        raise HopLimitExceeded(f"history already has {len(prior)} records")
    if prior.records and prior.head.addressee[0] != d.origin[0]:
        raise ProtocolError(
            f"record from agent {d.origin[0]} cannot extend a history addressed to "
            f"agent {prior.head.addressee[0]}"
        )
    return CHistory((d,) + prior.records)


def detect_feedback(receiver: AgentRole, incoming: CHistory) -> Feedback:
    """Compare the incoming head with the receiver's most recent record in the history.

    Positive when the returning decision concerns the image X of the
    receiver's period P and carries the same correspondence read backwards
    (X -> P); negative when a cycle exists but either part disagrees.
    """
    head = incoming.head
    if head is None or head.addressee != receiver:
        return Feedback.NONE
    own = next((r for r in incoming.records[1:] if r.origin == receiver), None)
    if own is None or head.origin[1] != own.addressee[1]:
        return Feedback.NONE
    p, x = own.corr_pair
    if head.period == x and head.corr_pair == (x, p):
        return Feedback.POSITIVE
    return Feedback.NEGATIVE


def exchange_link(
    link: RolePairLink,
    da: Decision,
    db: Decision,
    trace: Callable[[str], None] | None = None,
) -> tuple[Feedback, Feedback]:
    """Run the three-hop schedule on one link, initiated by ``link.a``.

    Hop 1 carries a's decision to b, hop 2 returns it headed by b's
    decision (a detects the cycle), hop 3 sends it back headed by a's
    current decision (b detects). Decisions are frozen within a round, so
    a's hop-3 decision is its hop-1 decision.
    """
    h1 = head_history(DecisionRecord.from_decision(da, link.b))
    h2 = head_history(DecisionRecord.from_decision(db, link.a), h1)
    fa = detect_feedback(link.a, h2)
    h3 = head_history(DecisionRecord.from_decision(da, link.b), h2)
    fb = detect_feedback(link.b, h3)
    if trace is not None:
        for hop, h in enumerate((h1, h2, h3), 1):
            trace(f"link={link} hop={hop} record={h.head}")
    return fa, fb


def run_exchange_round(
    soc: Society,
    decisions: Mapping[UnitKey, Decision],
    suite: GameSuite | None = None,
    links: list[RolePairLink] | None = None,
    trace: Callable[[str], None] | None = None,
) -> dict[UnitKey, tuple[int, int]]:
    """Feedback tallies (positive, negative) per (agent, role, target role).

    ``decisions`` is keyed by (agent, role, target role) and must cover
    both endpoints of every link.
    """
    links = links if links is not None else role_pair_links(soc, suite)
    tallies: dict[UnitKey, list[int]] = defaultdict(lambda: [0, 0])
    for link in links:
        ka = (link.a[0], link.a[1], link.b[1])
        kb = (link.b[0], link.b[1], link.a[1])
        missing = [k for k in (ka, kb) if k not in decisions]
        if missing:
            raise ProtocolError(f"link {link} has no decision for {missing}")
        for key, fb in zip((ka, kb), exchange_link(link, decisions[ka], decisions[kb], trace)):
            tally = tallies[key]
            if fb is Feedback.POSITIVE:
                tally[0] += 1
            elif fb is Feedback.NEGATIVE:
                tally[1] += 1
    return {k: (v[0], v[1]) for k, v in tallies.items()}
