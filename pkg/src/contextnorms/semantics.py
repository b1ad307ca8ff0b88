"""Role vocabularies, coherent correspondences, incompatibility and utility.

Periods are plain string labels. A vocabulary is the tuple of a role's
period labels ordered by preference, so a label's rank is its position.
All periods inside one vocabulary are mutually disjoint; two periods are
either equal or disjoint.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import DomainError

DEFAULT_ROLES = ("fmember", "worker", "dependent", "boss")

# fmember periods are written m_p / m_np
ROLE_PREFIX = {"fmember": "m", "worker": "w", "dependent": "d", "boss": "b"}

DEFAULT_INCOMPATIBLE = frozenset(
    frozenset(pair)
    for pair in [
        ("fmember", "worker"),
        ("fmember", "boss"),
        ("dependent", "worker"),
        ("dependent", "boss"),
    ]
)

PAYOFF = 3.0
PENALTY = -5.0


def default_vocabulary(role: str) -> tuple[str, str]:
    prefix = ROLE_PREFIX.get(role, role[0])
    return (f"{prefix}_p", f"{prefix}_np")


def default_vocabularies(roles: Iterable[str] = DEFAULT_ROLES) -> dict[str, tuple[str, ...]]:
    return {role: default_vocabulary(role) for role in roles}


def rank_gamma(vocabulary: tuple[str, ...]) -> dict[str, float]:
    """Preference scores 1 - rank/(K-1): most preferred 1, least preferred 0."""
    k = len(vocabulary)
    if k == 1:
        return {vocabulary[0]: 1.0}
    return {label: 1.0 - rank / (k - 1) for rank, label in enumerate(vocabulary)}


@dataclass(frozen=True)
class PreferenceFn:
    """Preference score per (role, period label)."""

    table: Mapping[tuple[str, str], float]

    @classmethod
    def from_vocabularies(cls, vocabularies: Mapping[str, tuple[str, ...]]) -> "PreferenceFn":
        table = {}
        for role, vocab in vocabularies.items():
            for label, score in rank_gamma(tuple(vocab)).items():
                table[(role, label)] = score
        return cls(table)

    def __call__(self, role: str, period: str) -> float:
        try:
            return self.table[(role, period)]
        except KeyError:
            raise DomainError(f"period {period!r} is not in the vocabulary of {role!r}") from None


@dataclass(frozen=True)
class CorrespondenceMap:
    """Subjective correspondence from one role's periods to another's."""

    source_role: str
    target_role: str
    pairs: frozenset[tuple[str, str]]

    @classmethod
    def from_dict(cls, source_role, target_role, mapping: Mapping[str, str]):
        return cls(source_role, target_role, frozenset(mapping.items()))

    def image(self, period: str) -> str:
        targets = [x for p, x in self.pairs if p == period]
        if len(targets) != 1:
            raise DomainError(
                f"{period!r} has {len(targets)} images under {self.source_role}->{self.target_role}"
            )
        return targets[0]

    def as_dict(self) -> dict[str, str]:
        return dict(sorted(self.pairs))

    def inverse(self) -> "CorrespondenceMap":
        return CorrespondenceMap(
            self.target_role, self.source_role, frozenset((x, p) for p, x in self.pairs)
        )

    def is_inverse_of(self, other: "CorrespondenceMap") -> bool:
        return (
            self.source_role == other.target_role
            and self.target_role == other.source_role
            and self.inverse().pairs == other.pairs
        )

    def __str__(self):
        body = ", ".join(f"{p}<->{x}" for p, x in sorted(self.pairs))
        return f"{{{body}}}"


def enumerate_coherent(
    src: tuple[str, ...],
    dst: tuple[str, ...],
    source_role: str = "src",
    target_role: str = "dst",
) -> list[CorrespondenceMap]:
    """All total maps from ``src`` to ``dst`` satisfying both validity constraints.

    With disjoint periods the two constraints reduce to "function" and
    "injective", so these are the k-permutations of ``dst``. Output is
    ordered lexicographically by target rank, source by source.
    """
    if not src or not dst:
        raise DomainError("vocabularies must be non-empty")
    if len(set(src)) != len(src) or len(set(dst)) != len(dst):
        raise DomainError("period labels must be unique within a vocabulary")
    return [
        CorrespondenceMap(source_role, target_role, frozenset(zip(src, image)))
        for image in itertools.permutations(dst, len(src))
    ]


def validate_correspondence(c: CorrespondenceMap) -> list[str]:
    """Return one descriptor per violated validity constraint instance."""
    violations = []
    pairs = sorted(c.pairs)
    for (p, x), (q, y) in itertools.combinations(pairs, 2):
        if p == q and x != y:
            violations.append(f"single-image: {p} maps to both {x} and {y}")
        elif p != q and x == y:
            violations.append(f"disjointness: disjoint {p} and {q} both map to {x}")
    return violations


@dataclass(frozen=True)
class Decision:
    """Period chosen by ``owner`` for joint tasks with any agent playing ``target_role``."""

    owner: tuple[int, str]
    target_role: str
    period: str
    corr: CorrespondenceMap

    def __post_init__(self):
        if self.corr.source_role != self.owner[1] or self.corr.target_role != self.target_role:
            raise DomainError(
                f"correspondence {self.corr.source_role}->{self.corr.target_role} does not "
                f"match decision {self.owner[1]}->{self.target_role}"
            )
        if not any(p == self.period for p, _ in self.corr.pairs):
            raise DomainError(f"correspondence has no pair for period {self.period!r}")

    @property
    def corr_pair(self) -> tuple[str, str]:
        return (self.period, self.corr.image(self.period))


def _incompatible_in(decisions: Mapping[str, Decision], incompatible):
    roles = sorted(decisions)
    for k, m in itertools.combinations(roles, 2):
        if frozenset((k, m)) in incompatible:
            yield k, m


def count_applicable_constraints(
    decisions: Mapping[str, Decision], incompatible=DEFAULT_INCOMPATIBLE
) -> int:
    return sum(1 for _ in _incompatible_in(decisions, incompatible))


def count_incompatibility_violations(
    agent: int,
    own_role: str,
    decisions: Mapping[str, Decision],
    incompatible=DEFAULT_INCOMPATIBLE,
) -> int:
    """Incompatible context-role pairs for which ``agent:own_role`` chose the same period."""
    for target, d in decisions.items():
        if d.owner != (agent, own_role) or d.target_role != target:
            raise DomainError(f"decision {d.owner}->{d.target_role} filed under {target!r}")
    return sum(
        1
        for k, m in _incompatible_in(decisions, incompatible)
        if decisions[k].period == decisions[m].period
    )


def utility(
    agent: int,
    role: str,
    period: str,
    local_decisions: Mapping[str, Decision],
    prefs: PreferenceFn,
    payoff_const: float = PAYOFF,
    penalty_const: float = PENALTY,
    incompatible=DEFAULT_INCOMPATIBLE,
) -> float:
    """gamma(role, period) + payoff*satisfied + penalty*violated over the agent's own decisions."""
    gamma = prefs(role, period)
    applicable = count_applicable_constraints(local_decisions, incompatible)
    violated = count_incompatibility_violations(agent, role, local_decisions, incompatible)
    return gamma + payoff_const * (applicable - violated) + penalty_const * violated
