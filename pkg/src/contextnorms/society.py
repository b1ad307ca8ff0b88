"""Agent networks, role assignment and derived social structure."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

import networkx as nx
import numpy as np

from .errors import AssignmentError, ParameterError
from .games import GameSuite, default_suite
from .semantics import DEFAULT_INCOMPATIBLE, DEFAULT_ROLES


@dataclass(frozen=True)
class Society:
    """Undirected agent graph with role assignments.

    ``edges`` holds sorted agent pairs without self-loops; an agent's
    neighbourhood including itself is computed on demand.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    roles: tuple[frozenset[str], ...]
    role_set: tuple[str, ...] = DEFAULT_ROLES
    incompatible: frozenset = DEFAULT_INCOMPATIBLE

    def __post_init__(self):
        if len(self.roles) != self.n:
            raise ParameterError(f"{len(self.roles)} role sets for {self.n} agents")
        for i, j in self.edges:
            if i == j:
                raise ParameterError(f"self-edge at {i}")
            if not (0 <= i < j < self.n):
                raise ParameterError(f"edge ({i}, {j}) is not a sorted pair of agents")
        if len(set(self.edges)) != len(self.edges):
            raise ParameterError("duplicate edges")
        for i, rs in enumerate(self.roles):
            unknown = set(rs) - set(self.role_set)
            if unknown:
                raise ParameterError(f"agent {i} plays unknown roles {sorted(unknown)}")

    @cached_property
    def adjacency(self) -> tuple[frozenset[int], ...]:
        adj = [set() for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return tuple(frozenset(a) for a in adj)

    @property
    def agents(self) -> range:
        return range(self.n)

    def role_index(self, role: str) -> int:
        return self.role_set.index(role)

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    def to_graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return g


@dataclass(frozen=True)
class RolePairLink:
    """Interaction between two agent-roles; ``a`` and ``b`` may share an agent."""

    a: tuple[int, str]
    b: tuple[int, str]

    @property
    def is_self_link(self) -> bool:
        return self.a[0] == self.b[0]

    @property
    def roles(self) -> tuple[str, str]:
        return (self.a[1], self.b[1])

    def other(self, end: tuple[int, str]) -> tuple[int, str]:
        if end == self.a:
            return self.b
        if end == self.b:
            return self.a
        raise KeyError(end)

    def __str__(self):
        return f"{self.a[0]}:{self.a[1]}-{self.b[0]}:{self.b[1]}"


def _edges_of(g: nx.Graph) -> tuple[tuple[int, int], ...]:
    return tuple(sorted(tuple(sorted(e)) for e in g.edges()))


def generate_small_world(n: int, k: int, p_rewire: float, seed: int) -> nx.Graph:
    """Watts-Strogatz ring lattice of degree ``k`` with rewiring probability ``p_rewire``."""
    if not (isinstance(k, int) and k >= 2 and k % 2 == 0):
        raise ParameterError(f"k must be an even integer >= 2, got {k!r}")
    if not n > k:
        raise ParameterError(f"need n > k, got n={n}, k={k}")
    if not 0.0 <= p_rewire <= 1.0:
        raise ParameterError(f"p_rewire must be in [0, 1], got {p_rewire}")
    return nx.watts_strogatz_graph(n, k, p_rewire, seed=seed)


def generate_scale_free(n: int, m: int, seed: int) -> nx.Graph:
    """Preferential attachment grown from a complete graph on ``m`` vertices."""
    if not (isinstance(m, int) and 1 <= m < n):
        raise ParameterError(f"need 1 <= m < n, got n={n}, m={m}")
    return nx.barabasi_albert_graph(n, m, seed=seed, initial_graph=nx.complete_graph(m))


def map_ann_to_params(n: int, ann: int, family: str = "ba") -> dict[str, int]:
    """Generator parameters for a target average number of neighbours.

    Watts-Strogatz uses k = ann; Barabasi-Albert uses m = ann / 2.
    """
    if not isinstance(ann, int) or ann < 2 or ann % 2:
        raise ParameterError(f"ANN must be an even integer >= 2, got {ann!r}")
    if family == "ws":
        if not n > ann:
            raise ParameterError(f"W networks need n > ANN, got n={n}, ANN={ann}")
        return {"k": ann}
    if family == "ba":
        if not ann // 2 < n:
            raise ParameterError(f"B networks need ANN/2 < n, got n={n}, ANN={ann}")
        return {"m": ann // 2}
    raise ParameterError(f"unknown network family {family!r}")


# role assignment ----------------------------------------------------------


@dataclass(frozen=True)
class RoleAssignmentConfig:
    """Allowed role sets with sampling weights plus population-level constraints.

    ``caps`` bounds the fraction of agents playing a role; ``required_neighbors``
    maps a role to a role that at least one neighbour must play.
    """

    role_sets: tuple[tuple[frozenset[str], float], ...] = (
        (frozenset({"fmember"}), 0.25),
        (frozenset({"worker"}), 0.25),
        (frozenset({"worker", "fmember"}), 0.25),
        (frozenset({"boss"}), 0.15),
        (frozenset({"dependent"}), 0.10),
    )
    caps: Mapping[str, float] = field(default_factory=lambda: {"dependent": 0.10})
    required_neighbors: Mapping[str, str] = field(default_factory=lambda: {"boss": "worker"})
    max_attempts: int = 1000
    reject_isolated: bool = True

    @property
    def allowed(self) -> frozenset[frozenset[str]]:
        return frozenset(rs for rs, _ in self.role_sets)


def check_constraints(soc: Society, cfg: RoleAssignmentConfig) -> list[str]:
    """Names of the assignment constraints ``soc`` violates (empty when valid)."""
    problems = []
    allowed = cfg.allowed
    for i, rs in enumerate(soc.roles):
        if not rs:
            problems.append(f"agent {i} plays no role")
        elif rs not in allowed:
            problems.append(f"agent {i} plays disallowed role set {sorted(rs)}")
    for role, frac in cfg.caps.items():
        count = sum(role in rs for rs in soc.roles)
        if count > math.floor(frac * soc.n + 1e-9):
            problems.append(f"{role} count {count} exceeds {frac:.0%} of {soc.n}")
    for role, needed in cfg.required_neighbors.items():
        for i, rs in enumerate(soc.roles):
            if role in rs and not any(needed in soc.roles[j] for j in soc.adjacency[i]):
                problems.append(f"{role} agent {i} has no {needed} neighbour")
    return problems


def _sample_sets(rng, n, options, weights):
    w = np.asarray(weights, dtype=float)
    idx = rng.choice(len(options), size=n, p=w / w.sum())
    return [set(options[k]) for k in idx]


def _repair(rng, adjacency, roles, cfg: RoleAssignmentConfig):
    n = len(roles)
    allowed = cfg.allowed
    for role, frac in cfg.caps.items():
        cap = math.floor(frac * n + 1e-9)
        holders = [i for i in range(n) if role in roles[i]]
        if len(holders) > cap:
            opts = [(rs, w) for rs, w in cfg.role_sets if role not in rs]
            excess = rng.choice(holders, size=len(holders) - cap, replace=False)
            fresh = _sample_sets(rng, len(excess), [o for o, _ in opts], [w for _, w in opts])
            for i, rs in zip(sorted(excess), fresh):
                roles[i] = rs
    for role, needed in cfg.required_neighbors.items():
        for i in range(n):
            if role not in roles[i] or any(needed in roles[j] for j in adjacency[i]):
                continue
            candidates = sorted(
                j for j in adjacency[i] if frozenset(roles[j] | {needed}) in allowed
            )
            if candidates:
                j = candidates[rng.integers(len(candidates))]
                roles[j] = roles[j] | {needed}


def assign_roles(
    skeleton: nx.Graph,
    cfg: RoleAssignmentConfig | None = None,
    seed: int = 0,
    role_set: tuple[str, ...] = DEFAULT_ROLES,
    incompatible=DEFAULT_INCOMPATIBLE,
    suite: GameSuite | None = None,
) -> Society:
    """Randomly assign role sets to the agents of a connected skeleton.

    Each attempt samples every agent's role set from the weighted options,
    repairs cap overflows and missing required neighbours where a neighbour
    can take the missing role, and is rejected when any constraint still
    fails or (optionally) an isolated same-role group remains.
    """
    cfg = cfg or RoleAssignmentConfig()
    suite = suite if suite is not None else default_suite()
    n = skeleton.number_of_nodes()
    if sorted(skeleton.nodes()) != list(range(n)):
        raise ParameterError("skeleton nodes must be 0..n-1")
    if n == 0 or not nx.is_connected(skeleton):
        raise ParameterError("skeleton graph must be connected")
    edges = _edges_of(skeleton)
    adjacency = [set(skeleton.neighbors(i)) for i in range(n)]
    rng = np.random.default_rng(seed)
    options = [rs for rs, _ in cfg.role_sets]
    weights = [w for _, w in cfg.role_sets]
    last = "no attempt made"
    for _ in range(cfg.max_attempts):
        roles = _sample_sets(rng, n, options, weights)
        _repair(rng, adjacency, roles, cfg)
        soc = Society(n, edges, tuple(frozenset(r) for r in roles), role_set, incompatible)
        problems = check_constraints(soc, cfg)
        if problems:
            last = problems[0]
            continue
        if cfg.reject_isolated:
            isolated = find_isolated_role_pairs(soc, suite)
            if isolated:
                role, group = isolated[0]
                last = f"isolated {role} agents {sorted(group)}"
                continue
        return soc
    raise AssignmentError(last, cfg.max_attempts)


def build_society(
    family: str,
    n: int,
    ann: int,
    seed: int,
    p_rewire: float = 0.5,
    cfg: RoleAssignmentConfig | None = None,
    role_set: tuple[str, ...] = DEFAULT_ROLES,
    incompatible=DEFAULT_INCOMPATIBLE,
    suite: GameSuite | None = None,
    max_graphs: int = 100,
) -> Society:
    """Generate a connected network and assign roles, regenerating as needed."""
    params = map_ann_to_params(n, ann, family)
    rng = np.random.default_rng(seed)
    for _ in range(max_graphs):
        gseed = int(rng.integers(2**31))
        if family == "ws":
            g = generate_small_world(n, params["k"], p_rewire, gseed)
        else:
            g = generate_scale_free(n, params["m"], gseed)
        if nx.is_connected(g):
            return assign_roles(
                g, cfg, seed=int(rng.integers(2**31)), role_set=role_set,
                incompatible=incompatible, suite=suite,
            )
    raise ParameterError(f"no connected {family} graph in {max_graphs} draws")


# neighbourhoods and links -------------------------------------------------


def _check_agent(soc: Society, i: int):
    if not (isinstance(i, (int, np.integer)) and 0 <= i < soc.n):
        raise LookupError(f"unknown agent {i!r}")


def neighborhood(soc: Society, i: int) -> frozenset[int]:
    """Adjacent agents plus ``i`` itself."""
    _check_agent(soc, i)
    return soc.adjacency[i] | {i}


def social_context(soc: Society, i: int) -> frozenset[str]:
    """Roles played anywhere in the neighbourhood of ``i``, its own included."""
    return frozenset().union(*(soc.roles[j] for j in neighborhood(soc, i)))


def role_pair_links(soc: Society, suite: GameSuite | None = None) -> list[RolePairLink]:
    """Links between distinct roles that share a joint task, including self-links.

    Across an edge i < j every role of i is paired with every distinct role
    of j; an agent playing several roles gets a link between each pair of
    its own roles. Only pairs present in ``suite`` are linked.
    """
    suite = suite if suite is not None else default_suite()
    order = {r: k for k, r in enumerate(soc.role_set)}

    def sorted_roles(rs):
        return sorted(rs, key=order.__getitem__)

    links = []
    for i in soc.agents:
        for k, m in itertools.combinations(sorted_roles(soc.roles[i]), 2):
            if (k, m) in suite:
                links.append(RolePairLink((i, k), (i, m)))
    for i, j in soc.edges:
        for k in sorted_roles(soc.roles[i]):
            for m in sorted_roles(soc.roles[j]):
                if k != m and (k, m) in suite:
                    links.append(RolePairLink((i, k), (j, m)))
    links.sort(key=lambda l: (l.a[0], order[l.a[1]], l.b[0], order[l.b[1]]))
    return links


def find_isolated_role_pairs(
    soc: Society, suite: GameSuite | None = None
) -> list[tuple[str, frozenset[int]]]:
    """Groups of same-role agents that may settle on different conventions.

    A candidate plays a single role k and sees exactly one foreign role m in
    its social context. Candidates are split when they fall in different
    connected components of the (k, m) link graph, and a component only
    counts as free when none of its agent-roles holds decisions towards two
    mutually incompatible roles (such an agent ties the (k, m) convention to
    the rest of the society). Returns ``(k, candidates in free components)``
    for every (k, m) with at least two components and at least one free
    candidate.
    """
    suite = suite if suite is not None else default_suite()
    links = role_pair_links(soc, suite)
    decided: dict[tuple[int, str], set[str]] = {}
    for l in links:
        decided.setdefault(l.a, set()).add(l.b[1])
        decided.setdefault(l.b, set()).add(l.a[1])

    def tied(end):
        return any(
            frozenset(p) in soc.incompatible
            for p in itertools.combinations(sorted(decided.get(end, ())), 2)
        )

    result = []
    for k in soc.role_set:
        by_foreign: dict[str, list[int]] = {}
        for i in soc.agents:
            if soc.roles[i] != frozenset({k}):
                continue
            foreign = social_context(soc, i) - {k}
            if len(foreign) == 1:
                by_foreign.setdefault(next(iter(foreign)), []).append(i)
        for m in sorted(by_foreign):
            g = nx.Graph()
            for l in links:
                if set(l.roles) == {k, m}:
                    g.add_edge(l.a, l.b)
            comps = list(nx.connected_components(g))
            if len(comps) < 2:
                continue
            free = set()
            for comp in comps:
                if not any(tied(end) for end in comp):
                    free |= {a for a, r in comp if r == k and a in by_foreign[m]}
            if free:
                result.append((k, frozenset(free)))
    return result


# text format ---------------------------------------------------------------


def to_text(soc: Society) -> str:
    """Line format: header, one ``agent`` line per agent, one ``edge`` line per edge."""
    order = {r: k for k, r in enumerate(soc.role_set)}
    pairs = sorted(
        tuple(sorted(p, key=order.__getitem__)) for p in soc.incompatible
    )
    lines = [
        f"society {soc.n}",
        "roles " + " ".join(soc.role_set),
        "incompatible " + " ".join(f"{a}:{b}" for a, b in sorted(pairs, key=lambda p: (order[p[0]], order[p[1]]))),
    ]
    for i, rs in enumerate(soc.roles):
        lines.append(f"agent {i} " + ",".join(sorted(rs, key=order.__getitem__)))
    for i, j in soc.edges:
        lines.append(f"edge {i} {j}")
    return "\n".join(lines) + "\n"


def from_text(text: str) -> Society:
    n = None
    role_set: tuple[str, ...] = ()
    incompatible = frozenset()
    roles: dict[int, frozenset[str]] = {}
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split()
        if not parts:
            continue
        kind, rest = parts[0], parts[1:]
        if kind == "society":
            n = int(rest[0])
        elif kind == "roles":
            role_set = tuple(rest)
        elif kind == "incompatible":
            incompatible = frozenset(frozenset(p.split(":")) for p in rest)
        elif kind == "agent":
            roles[int(rest[0])] = frozenset(rest[1].split(",")) if len(rest) > 1 else frozenset()
        elif kind == "edge":
            edges.append((int(rest[0]), int(rest[1])))
        else:
            raise ParameterError(f"line {lineno}: unknown record {kind!r}")
    if n is None:
        raise ParameterError("missing society header")
    return Society(n, tuple(edges), tuple(roles[i] for i in range(n)), role_set, incompatible)


def describe(soc: Society, suite: GameSuite | None = None) -> dict:
    """Summary used by the ``inspect`` command."""
    degrees = [soc.degree(i) for i in soc.agents]
    counts = {r: sum(r in rs for rs in soc.roles) for r in soc.role_set}
    return {
        "n": soc.n,
        "edges": len(soc.edges),
        "ann": 2 * len(soc.edges) / soc.n if soc.n else 0.0,
        "min_degree": min(degrees) if degrees else 0,
        "max_degree": max(degrees) if degrees else 0,
        "role_counts": counts,
        "multi_role_agents": sum(len(rs) > 1 for rs in soc.roles),
        "links": len(role_pair_links(soc, suite)),
        "isolated": find_isolated_role_pairs(soc, suite),
    }
