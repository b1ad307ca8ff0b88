import itertools

import pytest

from contextnorms.config import config_from_dict
from contextnorms.errors import ConfigError, DomainError, NoJointTask
from contextnorms.games import (
    GameSuite,
    GameTable,
    best_joint_payoff,
    check_ground_truth,
    game_payoff,
    induced_alignment,
)

LOSE = (-1, -1)


def test_lookup_examples(suite):
    assert game_payoff(suite, ("worker", "w_p"), ("boss", "b_np")) == (3, 2)
    assert game_payoff(suite, ("worker", "w_p"), ("fmember", "m_p")) == (2, 3)
    assert game_payoff(suite, ("worker", "w_p"), ("boss", "b_p")) == LOSE
    assert game_payoff(suite, ("worker", "w_p"), ("dependent", "d_p")) == (3, 3)


def test_swap_symmetry(suite):
    for t in suite:
        for pa, pb in itertools.product(t.periods_a, t.periods_b):
            x = game_payoff(suite, (t.role_a, pa), (t.role_b, pb))
            y = game_payoff(suite, (t.role_b, pb), (t.role_a, pa))
            assert x == y[::-1]


def test_no_joint_task(suite):
    assert game_payoff(suite, ("boss", "b_p"), ("dependent", "d_p")) is None
    with pytest.raises(NoJointTask):
        best_joint_payoff(suite, "boss", "fmember")


def test_unknown_period(suite):
    with pytest.raises(DomainError):
        game_payoff(suite, ("worker", "w_x"), ("boss", "b_p"))


@pytest.mark.parametrize(
    "pair,best",
    [(("worker", "boss"), 5), (("worker", "dependent"), 6), (("fmember", "dependent"), 6), (("fmember", "worker"), 5)],
)
def test_best_joint(suite, pair, best):
    assert best_joint_payoff(suite, *pair) == best


def test_default_alignment(suite):
    classes = induced_alignment(suite)
    expected = {
        frozenset({("worker", "w_p"), ("fmember", "m_p"), ("dependent", "d_p"), ("boss", "b_np")}),
        frozenset({("worker", "w_np"), ("fmember", "m_np"), ("dependent", "d_np"), ("boss", "b_p")}),
    }
    assert set(classes) == expected


def test_inconsistent_suite_rejected():
    # worker-boss says w_p ~ b_np, a second table then glues w_p to w_np via boss
    bad = GameSuite([
        GameTable.from_rows("worker", "boss", ("w_p", "w_np"), ("b_p", "b_np"), [[LOSE, (3, 2)], [LOSE, (2, 3)]]),
    ])
    with pytest.raises(ConfigError):
        check_ground_truth(bad)


def test_missing_cell_rejected():
    with pytest.raises(ConfigError):
        GameTable("worker", "boss", ("w_p",), ("b_p",), {})


def test_custom_suite_must_be_consistent():
    cfg = {"games": [{"roles": ["worker", "boss"], "payoff": [[[3, 3], [3, 3]], [[-1, -1], [-1, -1]]]}]}
    with pytest.raises(ConfigError):
        config_from_dict(cfg)
