import csv
import io

import pytest
import yaml

from contextnorms.config import CaseSpec, ScenarioConfig, config_from_dict
from contextnorms.experiment import (
    agent_in_agreement,
    convergence_rows,
    curve_rows,
    fraction_in_agreement,
    render_outputs,
    run_seeds,
    run_single,
    run_suite,
    society_for,
    suite_jobs,
)

from contextnorms.society import role_pair_links

from conftest import decision, society

B10 = CaseSpec("ba", 10, 4)


def dyad_decisions(wp, bp, swap_w=True, swap_b=True):
    return {
        (0, "worker", "boss"): decision(0, "worker", "boss", wp, swap=swap_w),
        (1, "boss", "worker"): decision(1, "boss", "worker", bp, swap=swap_b),
    }


def test_agreement_examples(dyad, suite):
    assert agent_in_agreement(0, dyad_decisions(0, 1), dyad, suite)
    assert not agent_in_agreement(0, dyad_decisions(0, 0), dyad, suite)  # (-1,-1) cell
    # inverse identity maps with corresponding periods, but the pair does not work in reality
    assert not agent_in_agreement(0, dyad_decisions(0, 0, False, False), dyad, suite)


def test_violation_breaks_agreement(suite):
    soc = society(3, [(0, 1), (0, 2)], [{"worker"}, {"boss"}, {"fmember"}])
    d = {
        (0, "worker", "boss"): decision(0, "worker", "boss", 0, swap=True),
        (1, "boss", "worker"): decision(1, "boss", "worker", 1, swap=True),
        (0, "worker", "fmember"): decision(0, "worker", "fmember", 0),
        (2, "fmember", "worker"): decision(2, "fmember", "worker", 0),
    }
    assert agent_in_agreement(2, d, soc, suite) and agent_in_agreement(1, d, soc, suite)
    assert not agent_in_agreement(0, d, soc, suite)  # w_p towards boss and fmember


def test_full_fixture_agrees(suite):
    # the global norm: every link on its success cell with inverse maps
    soc = society(4, [(0, 1), (0, 2), (0, 3)], [{"worker", "fmember"}, {"boss"}, {"dependent"}, {"worker"}])
    per = {("worker", "boss"): 1, ("worker", "fmember"): 0, ("worker", "dependent"): 0, ("boss", "worker"): 0,
           ("fmember", "worker"): 0, ("fmember", "dependent"): 1, ("dependent", "worker"): 0,
           ("dependent", "fmember"): 1}
    swap = {frozenset({"worker", "boss"}): True, frozenset({"worker", "fmember"}): False,
            frozenset({"worker", "dependent"}): False, frozenset({"fmember", "dependent"}): False}
    d = {}
    for l in role_pair_links(soc, suite):
        for (i, k), (_, m) in ((l.a, l.b), (l.b, l.a)):
            d[(i, k, m)] = decision(i, k, m, per[(k, m)], swap=swap[frozenset({k, m})])
    assert fraction_in_agreement(d, soc, suite) == 1.0


def test_seeds():
    assert run_seeds(0, "B_10_4", 0) == run_seeds(0, "B_10_4", 0)
    assert run_seeds(0, "B_10_4", 0) != run_seeds(0, "B_10_4", 1)
    assert run_seeds(0, "B_10_4", 0) != run_seeds(1, "B_10_4", 0)
    assert run_seeds(0, "B_10_4", 0) != run_seeds(0, "B_20_4", 0)


def test_zero_edge_run():
    cfg = ScenarioConfig()
    m = run_single(cfg, "empty", "irl", 1.0, soc=society(2, [], [{"boss"}, {"boss"}]))
    assert m.converged and m.converged_round == cfg.window
    assert all(r.phase == "exploitation" for r in m.rounds)


def test_stop_rules():
    full = ScenarioConfig(stop_rule="full")
    thr = full.with_overrides(stop_rule="threshold")
    a = run_single(full, B10, "crl", 0.9, 0)
    b = run_single(thr, B10, "crl", 0.9, 0)
    assert a.converged and b.converged and a.converged_round == b.converged_round
    assert len(b.rounds) == b.converged_round <= len(a.rounds)
    assert a.rounds[a.converged_round - 1].phase == "exploitation"
    assert a.rounds[: len(b.rounds)] == b.rounds


def test_sentinel():
    cfg = ScenarioConfig(round_cap=30)
    m = run_single(cfg, B10, "irl", 1.0, 0)
    assert not m.converged and m.converged_round == 30 and len(m.rounds) == 30


def test_trace_cross_check(tmp_path):
    lines = []
    cfg = ScenarioConfig(round_cap=40)
    m = run_single(cfg, B10, "crl", 0.9, 1, trace=lines.append)
    links = len(role_pair_links(society_for(cfg, B10, 1)))
    assert len(lines) == 3 * links * len(m.rounds)
    assert lines[0].startswith("round=1 link=") and " hop=1 record=" in lines[0]


def test_suite_grid_and_outputs():
    cfg = config_from_dict({
        "cases": ["B_10_4", "B_20_4"], "methods": ["irl", "crl"], "thresholds": [0.9, 1.0],
        "runs": 1, "round_cap": 60,
    })
    assert len(suite_jobs(cfg)) == 8
    res = run_suite(cfg)
    conv = convergence_rows(res)
    assert len(conv) == 8
    assert all(float(r[3]) == 60 for r in conv if r[4] == 0)  # sentinel enters the mean
    out = render_outputs(res)
    rows = list(csv.reader(io.StringIO(out["convergence.csv"])))
    assert rows[0][:4] == ["case", "method", "T", "mean_convergence_round"] and len(rows) == 9
    curves = list(csv.DictReader(io.StringIO(out["curves.csv"])))
    assert {"mean_total_payoff", "mean_total_reward"} <= set(curves[0])
    meta = yaml.safe_load(out["metadata.yaml"])
    assert config_from_dict(meta["config"]) == cfg
    assert len(meta["runs"]) == 8
    metrics = list(csv.DictReader(io.StringIO(out["metrics.csv"])))
    assert len(metrics) == sum(len(m.rounds) for m in res.runs)


def test_curve_carry_forward():
    cfg = ScenarioConfig(runs=2, methods=("crl",), stop_rule="threshold")
    res = run_suite(cfg)
    ends = [m.epoch_ends() for m in res.runs]
    rows = curve_rows(res)
    last = max(e[-1].epoch for e in ends)
    assert [r[3] for r in rows] == list(range(last + 1))
    final = sum(e[-1].total_payoff for e in ends) / 2
    assert float(rows[-1][4]) == pytest.approx(final)


def test_parallel_matches_serial():
    cfg = ScenarioConfig(runs=2, round_cap=80)
    assert render_outputs(run_suite(cfg, parallel=2)) == render_outputs(run_suite(cfg))
