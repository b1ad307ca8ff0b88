"""Role-pair payoff matrices for the joint scheduling task."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .errors import ConfigError, DomainError, NoJointTask


@dataclass(frozen=True)
class GameTable:
    role_a: str
    role_b: str
    periods_a: tuple[str, ...]
    periods_b: tuple[str, ...]
    payoff: Mapping[tuple[str, str], tuple[float, float]]

    def __post_init__(self):
        missing = [
            (pa, pb)
            for pa in self.periods_a
            for pb in self.periods_b
            if (pa, pb) not in self.payoff
        ]
        if missing:
            raise ConfigError(
                f"games.{self.role_a}-{self.role_b}", f"missing cells {missing}"
            )

    @classmethod
    def from_rows(cls, role_a, role_b, periods_a, periods_b, rows):
        """Build from a row-major grid; ``rows[i][j]`` is the cell (periods_a[i], periods_b[j])."""
        payoff = {}
        for pa, row in zip(periods_a, rows):
            for pb, cell in zip(periods_b, row):
                payoff[(pa, pb)] = (float(cell[0]), float(cell[1]))
        return cls(role_a, role_b, tuple(periods_a), tuple(periods_b), payoff)

    def rows(self):
        return [[self.payoff[(pa, pb)] for pb in self.periods_b] for pa in self.periods_a]


class GameSuite:
    """Game tables keyed by unordered role pair."""

    def __init__(self, tables):
        self.tables = {}
        for t in tables:
            key = frozenset((t.role_a, t.role_b))
            if len(key) != 2:
                raise ConfigError(f"games.{t.role_a}-{t.role_b}", "a joint task needs two distinct roles")
            if key in self.tables:
                raise ConfigError(f"games.{t.role_a}-{t.role_b}", "duplicate table")
            self.tables[key] = t

    def __contains__(self, pair):
        return frozenset(pair) in self.tables

    def __iter__(self):
        return iter(self.tables.values())

    def __len__(self):
        return len(self.tables)

    def table(self, role_a, role_b) -> GameTable:
        try:
            return self.tables[frozenset((role_a, role_b))]
        except KeyError:
            raise NoJointTask((role_a, role_b)) from None

    def __eq__(self, other):
        return isinstance(other, GameSuite) and self.tables == other.tables

    def __repr__(self):
        return f"GameSuite({sorted(tuple(sorted(k)) for k in self.tables)})"


def default_suite() -> GameSuite:
    lose = (-1, -1)
    return GameSuite([
        GameTable.from_rows(
            "worker", "boss", ("w_p", "w_np"), ("b_p", "b_np"),
            [[lose, (3, 2)], [(2, 3), lose]],
        ),
        GameTable.from_rows(
            "worker", "fmember", ("w_p", "w_np"), ("m_p", "m_np"),
            [[(2, 3), lose], [lose, (3, 2)]],
        ),
        GameTable.from_rows(
            "worker", "dependent", ("w_p", "w_np"), ("d_p", "d_np"),
            [[(3, 3), lose], [lose, (3, 3)]],
        ),
        GameTable.from_rows(
            "fmember", "dependent", ("m_p", "m_np"), ("d_p", "d_np"),
            [[(3, 3), lose], [lose, (3, 3)]],
        ),
    ])


def game_payoff(suite: GameSuite, a: tuple[str, str], b: tuple[str, str]):
    """Payoffs for ``a=(role, period)`` and ``b=(role, period)`` in argument order.

    Returns None when the role pair has no joint task.
    """
    (role_a, pa), (role_b, pb) = a, b
    if (role_a, role_b) not in suite:
        return None
    t = suite.table(role_a, role_b)
    if t.role_a != role_a:
        (role_a, pa), (role_b, pb) = (role_b, pb), (role_a, pa)
        flip = True
    else:
        flip = False
    if pa not in t.periods_a:
        raise DomainError(f"{pa!r} is not a {role_a} period")
    if pb not in t.periods_b:
        raise DomainError(f"{pb!r} is not a {role_b} period")
    x, y = t.payoff[(pa, pb)]
    return (y, x) if flip else (x, y)


def best_joint_payoff(suite: GameSuite, role_a: str, role_b: str) -> float:
    t = suite.table(role_a, role_b)
    return max(x + y for x, y in t.payoff.values())


def success_cells(suite: GameSuite):
    """Cells where both sides receive a positive payoff, as ((role, period), (role, period))."""
    for t in suite:
        for (pa, pb), (x, y) in t.payoff.items():
            if x > 0 and y > 0:
                yield (t.role_a, pa), (t.role_b, pb)


def induced_alignment(suite: GameSuite) -> list[frozenset[tuple[str, str]]]:
    """Equivalence classes of (role, period) glued together by success cells.

    Raises ConfigError when the success cells are not a consistent alignment:
    two periods of one role land in the same class, or a failing cell joins
    two periods that other cells declare equal.
    """
    parent: dict = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for t in suite:
        for p in t.periods_a:
            find((t.role_a, p))
        for p in t.periods_b:
            find((t.role_b, p))
    for a, b in success_cells(suite):
        parent[find(a)] = find(b)

    classes: dict = {}
    for x in list(parent):
        classes.setdefault(find(x), set()).add(x)
    for members in classes.values():
        roles = [r for r, _ in members]
        if len(roles) != len(set(roles)):
            raise ConfigError("games", f"success cells equate two periods of one role: {sorted(members)}")
    for t in suite:
        for (pa, pb), (x, y) in t.payoff.items():
            success = x > 0 and y > 0
            same = find((t.role_a, pa)) == find((t.role_b, pb))
            if success != same:
                raise ConfigError(
                    f"games.{t.role_a}-{t.role_b}",
                    f"cell ({pa}, {pb}) contradicts the alignment induced by the other cells",
                )
    return sorted((frozenset(c) for c in classes.values()), key=lambda c: sorted(c))


def check_ground_truth(suite: GameSuite) -> None:
    induced_alignment(suite)
