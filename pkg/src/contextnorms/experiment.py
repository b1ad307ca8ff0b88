"""Runs, agreement checks, seeds and the CSV outputs of an experiment."""

from __future__ import annotations

import csv
import io
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

import numpy as np
import yaml

from .config import CaseSpec, ScenarioConfig
from .engine import RoundRecord, Simulation
from .games import GameSuite, game_payoff
from .learning import EXPLOITATION
from .protocol import run_exchange_round
from .semantics import Decision, count_incompatibility_violations
from .society import Society, build_society, role_pair_links

UnitKey = tuple[int, str, str]


# seeds and societies --------------------------------------------------------


def run_seeds(master_seed: int, case: str, run: int) -> tuple[int, int]:
    """(society seed, learner seed) for one run of a case.

    Both methods and every threshold reuse the same pair, so a case's runs
    compare methods on identical societies.
    """
    ss = np.random.SeedSequence([int(master_seed), zlib.crc32(case.encode()), int(run)])
    a, b = ss.generate_state(2)
    return int(a), int(b)


def society_for(config: ScenarioConfig, case: CaseSpec, run: int) -> Society:
    soc_seed, _ = run_seeds(config.master_seed, case.name, run)
    return build_society(
        case.family, case.n, case.ann, soc_seed, p_rewire=case.p_rewire,
        cfg=config.assignment, role_set=config.roles,
        incompatible=config.incompatible, suite=config.games,
    )


# agreement -------------------------------------------------------------------


def agent_in_agreement(
    i: int,
    decisions: Mapping[UnitKey, Decision],
    soc: Society,
    suite: GameSuite,
    links=None,
) -> bool:
    """Every link of ``i`` is a working agreement and ``i`` violates no constraint.

    A working agreement needs mutually inverse correspondences, each
    endpoint's period mapped onto the other's, and a positive joint payoff.
    """
    links = links if links is not None else role_pair_links(soc, suite)
    for l in links:
        if i not in (l.a[0], l.b[0]):
            continue
        da = decisions[(l.a[0], l.a[1], l.b[1])]
        db = decisions[(l.b[0], l.b[1], l.a[1])]
        if not da.corr.is_inverse_of(db.corr):
            return False
        if da.corr.image(da.period) != db.period or db.corr.image(db.period) != da.period:
            return False
        pa, pb = game_payoff(suite, (l.a[1], da.period), (l.b[1], db.period))
        if pa + pb <= 0:
            return False
    for k in soc.roles[i]:
        own = {m: d for (j, r, m), d in decisions.items() if j == i and r == k}
        if count_incompatibility_violations(i, k, own, soc.incompatible):
            return False
    return True


def fraction_in_agreement(decisions, soc: Society, suite: GameSuite) -> float:
    if soc.n == 0:
        return 1.0
    links = role_pair_links(soc, suite)
    return sum(agent_in_agreement(i, decisions, soc, suite, links) for i in soc.agents) / soc.n


# single runs -----------------------------------------------------------------


@dataclass
class RunMetrics:
    case: str
    method: str
    threshold: float
    run: int
    society_seed: int
    learner_seed: int
    converged_round: int  # round_cap when the run did not converge
    converged: bool
    rounds: list[RoundRecord] = field(default_factory=list)
    final_decisions: dict = field(default_factory=dict)  # as played in the last round

    @property
    def fractions(self) -> list[float]:
        return [r.fraction_agreeing for r in self.rounds]

    def epoch_ends(self) -> list[RoundRecord]:
        """Last recorded round of every epoch the run reached."""
        ends: dict[int, RoundRecord] = {}
        for r in self.rounds:
            ends[r.epoch] = r
        return [ends[e] for e in sorted(ends)]


def run_single(
    config: ScenarioConfig,
    case: CaseSpec | str,
    method: str,
    threshold: float,
    run: int = 0,
    trace: Callable[[str], None] | None = None,
    soc: Society | None = None,
) -> RunMetrics:
    """Play one run until full convergence (or the threshold, per ``stop_rule``) or the cap.

    With ``trace`` every round also runs the object-level c-history exchange,
    emits its hop records, and checks its feedback tallies against the
    engine's. A prebuilt ``soc`` replaces the generated society; ``case``
    is then only a label (a CaseSpec or a plain name).
    """
    name = case if isinstance(case, str) else case.name
    soc_seed, learn_seed = run_seeds(config.master_seed, name, run)
    if soc is None:
        soc = society_for(config, case, run)
    sim = Simulation(
        soc, config.games, config.vocabularies, config.learner, method,
        rng=np.random.default_rng(learn_seed), crl_qstar=config.crl_qstar,
        exploit_rounds=config.exploit_rounds, quota=config.quota,
    )
    metrics = RunMetrics(name, method, threshold, run, soc_seed, learn_seed, config.round_cap, False)
    streak_t = streak_full = 0
    for _ in range(config.round_cap):
        sim.select()
        if trace is not None:
            tag = f"round={sim.round + 1}"
            tallies = run_exchange_round(
                soc, sim.decisions(), config.games, sim.links, lambda line: trace(f"{tag} {line}")
            )
        rec = sim.step()
        if trace is not None:
            pos, neg = sim.last_feedback
            for u, key in enumerate(sim.units):
                if tallies.get(key, (0, 0)) != (pos[u], neg[u]):
                    raise AssertionError(f"feedback mismatch at {key}: {tallies.get(key)} vs {(pos[u], neg[u])}")
        metrics.rounds.append(rec)
        exploiting = rec.phase == EXPLOITATION
        streak_t = streak_t + 1 if exploiting and rec.fraction_agreeing >= threshold - 1e-12 else 0
        streak_full = streak_full + 1 if exploiting and rec.fraction_agreeing >= 1.0 - 1e-12 else 0
        if not metrics.converged and streak_t >= config.window:
            metrics.converged, metrics.converged_round = True, rec.round
            if config.stop_rule == "threshold":
                break
        if streak_full >= config.window:
            break
    metrics.final_decisions = sim.decisions()
    return metrics


# suites ----------------------------------------------------------------------


def suite_jobs(config: ScenarioConfig):
    return [
        (case, method, t, run)
        for case in config.cases
        for method in config.methods
        for t in config.thresholds
        for run in range(config.runs)
    ]


def _job(args):
    config, case, method, t, run = args
    return run_single(config, case, method, t, run)


@dataclass
class SuiteResult:
    config: ScenarioConfig
    runs: list[RunMetrics]

    def groups(self):
        out: dict[tuple[str, str, float], list[RunMetrics]] = {}
        for m in self.runs:
            out.setdefault((m.case, m.method, m.threshold), []).append(m)
        return out


def run_suite(config: ScenarioConfig, parallel: int = 1) -> SuiteResult:
    """Every (case, method, threshold, run) of the grid; results keep grid order."""
    jobs = [(config, *j) for j in suite_jobs(config)]
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as ex:
            runs = list(ex.map(_job, jobs))
    else:
        runs = [_job(j) for j in jobs]
    return SuiteResult(config, runs)


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def curve_rows(result: SuiteResult):
    """Mean total payoff at each epoch end; a run that stopped early holds its last value.

    A group's curve ends at the last epoch any of its runs reached.
    """
    rows = []
    for (case, method, t), runs in result.groups().items():
        ends = [m.epoch_ends() for m in runs]
        last = max(e[-1].epoch for e in ends if e)
        for epoch in range(last + 1):
            pay, rew = [], []
            for e in ends:
                rec = next((r for r in e if r.epoch == epoch), e[-1] if e[-1].epoch < epoch else None)
                if rec is None:
                    continue
                pay.append(rec.total_payoff)
                rew.append(rec.total_reward)
            rows.append([case, method, t, epoch, _fmt(np.mean(pay)), _fmt(np.mean(rew))])
    return rows


def convergence_rows(result: SuiteResult):
    rows = []
    for (case, method, t), runs in result.groups().items():
        rounds = [m.converged_round for m in runs]
        rows.append([
            case, method, t, _fmt(np.mean(rounds)), sum(m.converged for m in runs), len(runs),
            " ".join(str(r) for r in rounds),
        ])
    return rows


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def render_outputs(result: SuiteResult) -> dict[str, str]:
    """File name -> content for curves.csv, convergence.csv, metrics.csv and metadata.yaml."""
    curves = _csv(
        ["case", "method", "T", "epoch", "mean_total_payoff", "mean_total_reward"], curve_rows(result)
    )
    conv = _csv(
        ["case", "method", "T", "mean_convergence_round", "converged_runs", "runs", "rounds"],
        convergence_rows(result),
    )
    metric_rows = []
    for m in result.runs:
        for r in m.rounds:
            metric_rows.append([
                m.case, m.method, m.threshold, m.run, r.round, r.epoch, r.phase,
                _fmt(r.fraction_agreeing), _fmt(r.total_payoff), _fmt(r.total_reward),
                _fmt(r.payoff_bound), r.positive, r.negative, r.violations,
            ])
    metrics = _csv(
        ["case", "method", "T", "run", "round", "epoch", "phase", "fraction_agreeing",
         "total_payoff", "total_reward", "payoff_bound", "positive", "negative", "violations"],
        metric_rows,
    )
    meta = {
        "config": result.config.to_dict(),
        "runs": [
            {"case": m.case, "method": m.method, "T": m.threshold, "run": m.run,
             "society_seed": m.society_seed, "learner_seed": m.learner_seed,
             "converged_round": m.converged_round, "converged": m.converged}
            for m in result.runs
        ],
    }
    return {
        "curves.csv": curves,
        "convergence.csv": conv,
        "metrics.csv": metrics,
        "metadata.yaml": yaml.safe_dump(meta, sort_keys=False),
    }


def write_outputs(result: SuiteResult, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, text in render_outputs(result).items():
        p = out / name
        p.write_text(text)
        paths.append(p)
    return paths
