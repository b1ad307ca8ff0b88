"""Independent versus collaborative learners on a 10-agent scale-free society.

Prints the society, then the share of agreeing agents at the end of each
epoch for one run of each method, and writes the CSV outputs of a small
suite to ./demo_results. Run:  python3 demos/small_network.py
"""

from contextnorms import ScenarioConfig, run_single, run_suite, write_outputs
from contextnorms.config import CaseSpec
from contextnorms.experiment import society_for
from contextnorms.society import describe

case = CaseSpec.parse("B_10_4")
cfg = ScenarioConfig(cases=(case,), runs=2)

soc = society_for(cfg, case, 0)
info = describe(soc)
print(f"{case.name}: {info['edges']} edges, roles {info['role_counts']}, {info['links']} role-pair links")

for method in ("irl", "crl"):
    m = run_single(cfg, case, method, 0.9, 0)
    ends = " ".join(f"{r.fraction_agreeing:.1f}" for r in m.epoch_ends())
    print(f"{method.upper()}: agreeing share per epoch {ends}; converged round {m.converged_round}")

paths = write_outputs(run_suite(cfg), "demo_results")
print("wrote", ", ".join(str(p) for p in paths))
