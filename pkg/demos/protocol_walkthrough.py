"""One link, three hops: how feedback is produced.

Agent 0 (worker) and agent 1 (boss) each send a decision record carrying
their period and the pair <period, image> their correspondence gives it.
A returning record that reads the originator's pair backwards is positive
feedback; anything else that closes the cycle is negative.
Run:  python3 demos/protocol_walkthrough.py
"""

from contextnorms.protocol import exchange_link
from contextnorms.semantics import CorrespondenceMap, Decision
from contextnorms.society import RolePairLink

link = RolePairLink((0, "worker"), (1, "boss"))
crossed_w = CorrespondenceMap.from_dict("worker", "boss", {"w_p": "b_np", "w_np": "b_p"})
crossed_b = CorrespondenceMap.from_dict("boss", "worker", {"b_p": "w_np", "b_np": "w_p"})
straight_b = CorrespondenceMap.from_dict("boss", "worker", {"b_p": "w_p", "b_np": "w_np"})

cases = {
    "matching maps, matching periods": (Decision((0, "worker"), "boss", "w_p", crossed_w),
                                        Decision((1, "boss"), "worker", "b_np", crossed_b)),
    "matching maps, boss picks the other period": (Decision((0, "worker"), "boss", "w_p", crossed_w),
                                                   Decision((1, "boss"), "worker", "b_p", crossed_b)),
    "boss reads the vocabularies differently": (Decision((0, "worker"), "boss", "w_p", crossed_w),
                                                Decision((1, "boss"), "worker", "b_np", straight_b)),
}

for title, (dw, db) in cases.items():
    print(f"--- {title}")
    fw, fb = exchange_link(link, dw, db, trace=lambda line: print("  " + line))
    print(f"  feedback: worker {fw.value}, boss {fb.value}")
