"""Command-line front end: ``run``, ``suite`` and ``inspect``."""

from __future__ import annotations

import argparse
import sys

import yaml

from .config import CaseSpec, ScenarioConfig, load_config
from .errors import AssignmentError, ConfigError, ParameterError
from .experiment import SuiteResult, run_single, run_suite, society_for, write_outputs
from .society import describe


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML scenario file; flags override its values")
    p.add_argument("--case", action="append", help="case name such as B_100_10 (repeatable)")
    p.add_argument("--seed", type=int, help="master seed")


def _learning(p: argparse.ArgumentParser, single: bool) -> None:
    many = None if single else "append"
    p.add_argument("--method", action=many, choices=("irl", "crl"), type=str.lower)
    p.add_argument("--threshold", action=many, type=float, help="agreeing fraction T in (0, 1]")
    p.add_argument("--out-dir", default="results", help="directory for CSV and metadata output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contextnorms",
        description="Norm emergence through contextual agreements on social networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="play one run of one case and write its metrics")
    _common(run)
    _learning(run, single=True)
    run.add_argument("--run", type=int, default=0, help="run index within the case (selects the seeds)")
    run.add_argument("--trace", metavar="FILE", help="write the per-hop c-history exchange to FILE")

    suite = sub.add_parser("suite", help="play every case x method x threshold x run of a grid")
    _common(suite)
    _learning(suite, single=False)
    suite.add_argument("--runs", type=int, help="runs per case")
    suite.add_argument("--parallel", type=int, default=1, help="worker processes")

    insp = sub.add_parser("inspect", help="print a generated society without running it")
    _common(insp)
    insp.add_argument("--run", type=int, default=0)
    insp.add_argument("--echo-config", action="store_true", help="also print the resolved config")
    return parser


def resolve_config(args) -> ScenarioConfig:
    """Config file (or defaults) with command-line overrides applied."""
    cfg = load_config(args.config)
    over = {"master_seed": args.seed}
    if args.case:
        p_rewire = cfg.cases[0].p_rewire
        over["cases"] = tuple(CaseSpec.parse(c, p_rewire) for c in args.case)
    method = getattr(args, "method", None)
    if method:
        over["methods"] = (method,) if isinstance(method, str) else tuple(method)
    threshold = getattr(args, "threshold", None)
    if threshold:
        over["thresholds"] = (threshold,) if isinstance(threshold, float) else tuple(threshold)
    over["runs"] = getattr(args, "runs", None)
    return cfg.with_overrides(**over)


def _summary(result: SuiteResult) -> str:
    lines = []
    for (case, method, t), runs in result.groups().items():
        rounds = [m.converged_round for m in runs]
        lines.append(
            f"{case} {method} T={t:g}: converged {sum(m.converged for m in runs)}/{len(runs)}, "
            f"rounds {rounds}"
        )
    return "\n".join(lines)


def cmd_run(args, cfg: ScenarioConfig) -> int:
    case, method, t = cfg.cases[0], cfg.methods[0], cfg.thresholds[0]
    cfg = cfg.with_overrides(cases=(case,), methods=(method,), thresholds=(t,), runs=1)
    if args.trace:
        with open(args.trace, "w") as fh:
            m = run_single(cfg, case, method, t, args.run, trace=lambda line: fh.write(line + "\n"))
    else:
        m = run_single(cfg, case, method, t, args.run)
    result = SuiteResult(cfg, [m])
    write_outputs(result, args.out_dir)
    print(_summary(result))
    return 0


def cmd_suite(args, cfg: ScenarioConfig) -> int:
    result = run_suite(cfg, parallel=max(1, args.parallel))
    write_outputs(result, args.out_dir)
    print(_summary(result))
    return 0


def cmd_inspect(args, cfg: ScenarioConfig) -> int:
    for case in cfg.cases:
        soc = society_for(cfg, case, args.run)
        info = describe(soc, cfg.games)
        info["isolated"] = [{"role": k, "agents": sorted(ag)} for k, ag in info["isolated"]]
        print(yaml.safe_dump({case.name: info}, sort_keys=False), end="")
    if args.echo_config:
        print(cfg.to_yaml(), end="")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return {"run": cmd_run, "suite": cmd_suite, "inspect": cmd_inspect}[args.command](args, cfg)
    except (ConfigError, ParameterError, AssignmentError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
