import pytest
import yaml
from hypothesis import given, settings
from hypothesis import strategies as st

from contextnorms.config import CaseSpec, ScenarioConfig, config_from_dict, load_config
from contextnorms.errors import ConfigError
from contextnorms.games import default_suite
from contextnorms.learning import LearnerParams


def test_case_parse():
    c = CaseSpec.parse("B_100_10")
    assert (c.family, c.n, c.ann, c.name) == ("ba", 100, 10, "B_100_10")
    w = CaseSpec.parse("W_100_4")
    assert (w.family, w.p_rewire) == ("ws", 0.5)
    for bad in ["X_10_4", "B_10", "B_10_3", "W_4_4"]:
        with pytest.raises(ConfigError):
            CaseSpec.parse(bad)


def test_empty_is_default():
    cfg = config_from_dict({})
    assert cfg == ScenarioConfig()
    assert cfg.games == default_suite()
    assert cfg.learner == LearnerParams()
    assert load_config(None) == cfg


def test_round_trip_default():
    cfg = ScenarioConfig()
    assert config_from_dict(yaml.safe_load(cfg.to_yaml())) == cfg


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.sampled_from(["B_10_4", "B_100_20", "W_50_6"]), min_size=1, max_size=3, unique=True),
    st.lists(st.sampled_from(["irl", "crl"]), min_size=1, max_size=2, unique=True),
    st.lists(st.sampled_from([0.9, 1.0, 0.75]), min_size=1, max_size=3, unique=True),
    st.integers(1, 9), st.integers(0, 2**31), st.floats(0.05, 1.0), st.floats(0, 1),
    st.sampled_from(["full", "threshold"]), st.floats(0, 1),
)
def test_round_trip_property(cases, methods, ts, runs, seed, alpha, delta, stop, p_rewire):
    cfg = config_from_dict({
        "cases": cases, "methods": methods, "thresholds": ts, "runs": runs, "master_seed": seed,
        "learner": {"alpha": alpha, "delta": delta}, "stop_rule": stop, "p_rewire": p_rewire,
    })
    assert config_from_dict(yaml.safe_load(cfg.to_yaml())) == cfg


@pytest.mark.parametrize(
    "data,path",
    [
        ({"colour": 1}, "colour"),
        ({"learner": {"gamma": 1}}, "learner.gamma"),
        ({"assignment": {"foo": 1}}, "assignment.foo"),
        ({"methods": ["sarsa"]}, "methods"),
        ({"thresholds": [0]}, "thresholds"),
        ({"runs": 0}, "runs"),
        ({"learner": {"alpha": 2}}, "learner"),
        ({"games": [{"roles": ["worker", "boss"]}]}, "games[0]"),
        ({"games": [{"roles": ["worker", "boss"], "payoff": [[[1, 1]]]}]}, "games[0].payoff"),
        ({"vocabularies": {"worker": ["a", "b"]}}, "vocabularies.fmember"),
        ({"stop_rule": "never"}, "stop_rule"),
    ],
)
def test_validation_paths(data, path):
    with pytest.raises(ConfigError) as e:
        config_from_dict(data)
    assert e.value.path == path


def test_scalar_shorthand_and_role_subset():
    cfg = config_from_dict({"cases": "B_20_4", "methods": "CRL", "thresholds": 1.0})
    assert cfg.cases == (CaseSpec("ba", 20, 4),) and cfg.methods == ("crl",) and cfg.thresholds == (1.0,)
    sub = config_from_dict({
        "roles": ["worker", "boss"],
        "assignment": {"role_sets": [{"roles": ["worker"], "weight": 0.6}, {"roles": ["boss"], "weight": 0.4}],
                       "caps": {}},
        "games": [{"roles": ["worker", "boss"], "payoff": [[[-1, -1], [3, 2]], [[2, 3], [-1, -1]]]}],
    })
    assert sub.incompatible == frozenset() and len(sub.games) == 1
    assert config_from_dict(yaml.safe_load(sub.to_yaml())) == sub


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("cases: [B_10_4\n")
    with pytest.raises(ConfigError):
        load_config(bad)
    lst = tmp_path / "list.yaml"
    lst.write_text("- 1\n")
    with pytest.raises(ConfigError):
        load_config(lst)
    ok = tmp_path / "ok.yaml"
    ok.write_text("cases: [B_20_4]\nruns: 2\n")
    assert load_config(ok).runs == 2
