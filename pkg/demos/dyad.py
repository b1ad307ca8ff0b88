"""A worker and a boss learn when to meet.

Neither knows how the other's "preferred" and "non-preferred" periods line
up. Each holds a guess (a correspondence) and picks a period; the c-history
exchange tells them whether their guesses agree, and the game table tells
them whether the meeting worked. Run:  python3 demos/dyad.py
"""

from contextnorms import ScenarioConfig, Society, run_single

dyad = Society(2, ((0, 1),), (frozenset({"worker"}), frozenset({"boss"})))
cfg = ScenarioConfig(stop_rule="full")

for method in ("irl", "crl"):
    print(f"--- {method.upper()}")
    for run in range(5):
        m = run_single(cfg, "dyad", method, 1.0, run=run, soc=dyad)
        w = m.final_decisions[(0, "worker", "boss")]
        b = m.final_decisions[(1, "boss", "worker")]
        status = f"converged at round {m.converged_round}" if m.converged else "no convergence"
        print(f"run {run}: {status:28s} worker plays {w.period:5s} boss plays {b.period:5s} "
              f"worker reads {w.corr}, boss reads {b.corr}")
