"""Scenario configuration: YAML in, validated dataclasses out, and back.

A config file is a YAML mapping. Every key is optional; missing keys take
the standard experimental defaults. Unknown keys are rejected
with their dotted path. ``to_dict`` produces the resolved form, which
parses back to an equal config.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

import yaml

from .errors import ConfigError, ParameterError
from .games import GameSuite, GameTable, check_ground_truth, default_suite
from .learning import LearnerParams
from .semantics import DEFAULT_INCOMPATIBLE, DEFAULT_ROLES, default_vocabularies
from .society import RoleAssignmentConfig, map_ann_to_params

FAMILIES = {"B": "ba", "W": "ws"}
METHODS = ("irl", "crl")
STOP_RULES = ("full", "threshold")

_CASE = re.compile(r"^([BW])_(\d+)_(\d+)$")


@dataclass(frozen=True)
class CaseSpec:
    family: str
    n: int
    ann: int
    p_rewire: float = 0.5

    def __post_init__(self):
        if self.family not in FAMILIES.values():
            raise ConfigError("cases", f"unknown family {self.family!r}")
        if not 0.0 <= self.p_rewire <= 1.0:
            raise ConfigError("cases", f"p_rewire must be in [0, 1], got {self.p_rewire}")
        try:
            map_ann_to_params(self.n, self.ann, self.family)
        except ParameterError as e:
            raise ConfigError("cases", str(e)) from None

    @classmethod
    def parse(cls, text: str, p_rewire: float = 0.5) -> "CaseSpec":
        """Read ``B_100_10`` / ``W_100_4`` style case names."""
        m = _CASE.match(str(text).strip())
        if not m:
            raise ConfigError("cases", f"bad case name {text!r}; expected e.g. B_100_10 or W_100_4")
        fam, n, ann = m.groups()
        return cls(FAMILIES[fam], int(n), int(ann), p_rewire)

    @property
    def name(self) -> str:
        letter = "B" if self.family == "ba" else "W"
        return f"{letter}_{self.n}_{self.ann}"


@dataclass(frozen=True)
class ScenarioConfig:
    cases: tuple[CaseSpec, ...] = (CaseSpec("ba", 10, 4),)
    methods: tuple[str, ...] = ("irl", "crl")
    thresholds: tuple[float, ...] = (0.9,)
    runs: int = 5
    master_seed: int = 0
    round_cap: int = 1000
    window: int = 10
    exploit_rounds: int = 50
    quota: str = "per_epoch"
    crl_qstar: str = "coordinated"
    stop_rule: str = "full"
    learner: LearnerParams = field(default_factory=LearnerParams)
    roles: tuple[str, ...] = DEFAULT_ROLES
    incompatible: frozenset = DEFAULT_INCOMPATIBLE
    vocabularies: Mapping[str, tuple[str, ...]] = field(default_factory=default_vocabularies)
    assignment: RoleAssignmentConfig = field(default_factory=RoleAssignmentConfig)
    games: GameSuite = field(default_factory=default_suite)

    def __post_init__(self):
        if not self.cases:
            raise ConfigError("cases", "at least one case is required")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError("methods", f"unknown method {m!r}")
        if not self.methods:
            raise ConfigError("methods", "at least one method is required")
        for t in self.thresholds:
            if not 0.0 < t <= 1.0:
                raise ConfigError("thresholds", f"threshold must be in (0, 1], got {t}")
        if not self.thresholds:
            raise ConfigError("thresholds", "at least one threshold is required")
        for name in ("runs", "round_cap", "window", "exploit_rounds"):
            if getattr(self, name) < 1:
                raise ConfigError(name, "must be >= 1")
        if self.quota not in ("per_epoch", "cumulative"):
            raise ConfigError("quota", f"unknown trial quota {self.quota!r}")
        if self.crl_qstar not in ("coordinated", "best_response"):
            raise ConfigError("crl_qstar", f"unknown next-state value model {self.crl_qstar!r}")
        if self.stop_rule not in STOP_RULES:
            raise ConfigError("stop_rule", f"unknown stop rule {self.stop_rule!r}")
        for pair in self.incompatible:
            unknown = set(pair) - set(self.roles)
            if len(pair) != 2 or unknown:
                raise ConfigError("incompatible", f"bad pair {sorted(pair)}")
        for r in self.roles:
            if r not in self.vocabularies:
                raise ConfigError(f"vocabularies.{r}", "missing vocabulary")
            if len(set(self.vocabularies[r])) != len(self.vocabularies[r]):
                raise ConfigError(f"vocabularies.{r}", "duplicate period labels")
        if len({len(self.vocabularies[r]) for r in self.roles}) != 1:
            raise ConfigError("vocabularies", "all roles must have vocabularies of one size")
        for rs, _ in self.assignment.role_sets:
            if set(rs) - set(self.roles):
                raise ConfigError("assignment.role_sets", f"unknown roles in {sorted(rs)}")
        for t in self.games:
            for role, periods in ((t.role_a, t.periods_a), (t.role_b, t.periods_b)):
                if role not in self.roles:
                    raise ConfigError(f"games.{t.role_a}-{t.role_b}", f"unknown role {role!r}")
                if tuple(periods) != tuple(self.vocabularies[role]):
                    raise ConfigError(
                        f"games.{t.role_a}-{t.role_b}",
                        f"{role} periods {list(periods)} differ from its vocabulary",
                    )
        check_ground_truth(self.games)

    def with_overrides(self, **kw) -> "ScenarioConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    # serialisation ---------------------------------------------------------

    def to_dict(self) -> dict:
        order = {r: k for k, r in enumerate(self.roles)}

        def ordered(rs):
            return sorted(rs, key=order.__getitem__)

        return {
            "cases": [c.name for c in self.cases],
            "p_rewire": self.cases[0].p_rewire,
            "methods": list(self.methods),
            "thresholds": [float(t) for t in self.thresholds],
            "runs": self.runs,
            "master_seed": self.master_seed,
            "round_cap": self.round_cap,
            "window": self.window,
            "exploit_rounds": self.exploit_rounds,
            "quota": self.quota,
            "crl_qstar": self.crl_qstar,
            "stop_rule": self.stop_rule,
            "learner": self.learner.as_dict(),
            "roles": list(self.roles),
            "incompatible": sorted(ordered(p) for p in self.incompatible),
            "vocabularies": {r: list(self.vocabularies[r]) for r in self.roles},
            "assignment": {
                "role_sets": [
                    {"roles": ordered(rs), "weight": float(w)} for rs, w in self.assignment.role_sets
                ],
                "caps": dict(self.assignment.caps),
                "required_neighbors": dict(self.assignment.required_neighbors),
                "max_attempts": self.assignment.max_attempts,
                "reject_isolated": self.assignment.reject_isolated,
            },
            "games": [
                {
                    "roles": [t.role_a, t.role_b],
                    "payoff": [[list(cell) for cell in row] for row in t.rows()],
                }
                for t in self.games
            ],
        }

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=None)


_TOP_KEYS = {f.name for f in fields(ScenarioConfig)} | {"p_rewire"}
_ASSIGN_KEYS = {"role_sets", "caps", "required_neighbors", "max_attempts", "reject_isolated"}


def _reject_unknown(data: Mapping, allowed, prefix=""):
    for key in data:
        if key not in allowed:
            raise ConfigError(f"{prefix}{key}", "unknown field")


def _as_list(value, path):
    if isinstance(value, (str, int, float)):
        return [value]
    if not isinstance(value, (list, tuple)):
        raise ConfigError(path, f"expected a list, got {type(value).__name__}")
    return list(value)


def _games(items, vocab) -> GameSuite:
    tables = []
    for n, item in enumerate(_as_list(items, "games")):
        path = f"games[{n}]"
        if not isinstance(item, Mapping):
            raise ConfigError(path, "expected a mapping with roles and payoff")
        _reject_unknown(item, {"roles", "payoff"}, path + ".")
        if "roles" not in item or "payoff" not in item:
            raise ConfigError(path, "needs both roles and payoff")
        ra, rb = item["roles"]
        if ra not in vocab or rb not in vocab:
            raise ConfigError(path + ".roles", f"unknown role in {[ra, rb]}")
        rows = item["payoff"]
        if len(rows) != len(vocab[ra]) or any(len(r) != len(vocab[rb]) for r in rows):
            raise ConfigError(path + ".payoff", f"expected a {len(vocab[ra])}x{len(vocab[rb])} grid of pairs")
        try:
            tables.append(GameTable.from_rows(ra, rb, vocab[ra], vocab[rb], rows))
        except (TypeError, ValueError, IndexError) as e:
            raise ConfigError(path + ".payoff", str(e)) from None
    return GameSuite(tables)


def config_from_dict(data: Mapping[str, Any] | None) -> ScenarioConfig:
    """Build a validated config; absent keys keep their defaults."""
    data = dict(data or {})
    _reject_unknown(data, _TOP_KEYS)
    kw: dict[str, Any] = {}
    p_rewire = float(data.pop("p_rewire", 0.5))
    if "cases" in data:
        kw["cases"] = tuple(CaseSpec.parse(c, p_rewire) for c in _as_list(data.pop("cases"), "cases"))
    elif p_rewire != 0.5:
        kw["cases"] = tuple(replace(c, p_rewire=p_rewire) for c in ScenarioConfig().cases)
    if "methods" in data:
        kw["methods"] = tuple(str(m).lower() for m in _as_list(data.pop("methods"), "methods"))
    if "thresholds" in data:
        kw["thresholds"] = tuple(float(t) for t in _as_list(data.pop("thresholds"), "thresholds"))
    for key in ("runs", "master_seed", "round_cap", "window", "exploit_rounds"):
        if key in data:
            kw[key] = int(data.pop(key))
    for key in ("quota", "crl_qstar", "stop_rule"):
        if key in data:
            kw[key] = str(data.pop(key))
    if "learner" in data:
        lp = data.pop("learner") or {}
        _reject_unknown(lp, {f.name for f in fields(LearnerParams)}, "learner.")
        try:
            kw["learner"] = LearnerParams(**lp)
        except ParameterError as e:
            raise ConfigError("learner", str(e)) from None
    roles = tuple(data.pop("roles", DEFAULT_ROLES))
    kw["roles"] = roles
    if "incompatible" in data:
        kw["incompatible"] = frozenset(frozenset(p) for p in data.pop("incompatible"))
    elif set(roles) != set(DEFAULT_ROLES):
        kw["incompatible"] = frozenset(p for p in DEFAULT_INCOMPATIBLE if p <= set(roles))
    vocab = default_vocabularies(roles) if "vocabularies" not in data else {
        r: tuple(v) for r, v in (data.pop("vocabularies") or {}).items()
    }
    kw["vocabularies"] = vocab
    if "assignment" in data:
        a = data.pop("assignment") or {}
        _reject_unknown(a, _ASSIGN_KEYS, "assignment.")
        base = RoleAssignmentConfig()
        role_sets = base.role_sets
        if "role_sets" in a:
            role_sets = tuple(
                (frozenset(item["roles"]), float(item["weight"])) for item in a["role_sets"]
            )
        kw["assignment"] = RoleAssignmentConfig(
            role_sets=role_sets,
            caps=dict(a.get("caps", base.caps)),
            required_neighbors=dict(a.get("required_neighbors", base.required_neighbors)),
            max_attempts=int(a.get("max_attempts", base.max_attempts)),
            reject_isolated=bool(a.get("reject_isolated", base.reject_isolated)),
        )
    if "games" in data:
        kw["games"] = _games(data.pop("games"), vocab)
    return ScenarioConfig(**kw)


def load_config(path: str | Path | None) -> ScenarioConfig:
    if path is None:
        return ScenarioConfig()
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(str(path), f"cannot read: {e.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(str(path), f"invalid YAML: {e}") from None
    if data is not None and not isinstance(data, Mapping):
        raise ConfigError(str(path), "top level must be a mapping")
    return config_from_dict(data)
