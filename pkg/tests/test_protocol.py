import itertools

import pytest

from contextnorms.errors import ProtocolError
from contextnorms.protocol import (
    MAX_HOPS,
    CHistory,
    DecisionRecord,
    Feedback,
    HopLimitExceeded,
    detect_feedback,
    exchange_link,
    head_history,
    run_exchange_round,
)
from contextnorms.society import RolePairLink

from conftest import decision, society

I, J = (0, "worker"), (1, "boss")


def rec(origin, addressee, period, image):
    return DecisionRecord(origin, addressee, period, (period, image))


def test_head_history():
    d1 = rec(I, J, "w_p", "b_np")
    d2 = rec(J, I, "b_np", "w_p")
    h1 = head_history(d1)
    assert h1.records == (d1,)
    h2 = head_history(d2, h1)
    assert h2.records == (d2, d1) and h1.records == (d1,)
    h3 = head_history(d1, h2)
    with pytest.raises(HopLimitExceeded):
        head_history(d2, h3)
    assert len(h3) == MAX_HOPS
    with pytest.raises(ProtocolError):
        head_history(rec((2, "boss"), I, "b_p", "w_p"), h1)  # wrong sender for h1


def test_feedback_examples():
    sent = head_history(rec(I, J, "w_p", "b_np"))
    good = head_history(rec(J, I, "b_np", "w_p"), sent)
    assert detect_feedback(I, good) is Feedback.POSITIVE
    other = head_history(rec(J, I, "b_p", "w_np"), sent)
    assert detect_feedback(I, other) is Feedback.NEGATIVE
    assert detect_feedback(I, head_history(rec(J, I, "b_np", "w_p"))) is Feedback.NONE


def reference_positive(ci, cj, pi, pj):
    """Inverse maps and periods that map onto each other."""
    return ci.is_inverse_of(cj) and ci.image(pi) == pj and cj.image(pj) == pi


def test_brute_force_16():
    link = RolePairLink(I, J)
    seen = 0
    for si, sj, pi, pj in itertools.product((False, True), repeat=4):
        di = decision(0, "worker", "boss", int(pi), swap=si)
        dj = decision(1, "boss", "worker", int(pj), swap=sj)
        fa, fb = exchange_link(link, di, dj)
        want = Feedback.POSITIVE if reference_positive(di.corr, dj.corr, di.period, dj.period) else Feedback.NEGATIVE
        assert fa is want and fb is want
        seen += want is Feedback.POSITIVE
    assert seen == 4  # two inverse pairs of maps x two corresponding period pairs


def test_round_tallies(dyad, suite):
    ok = {
        (0, "worker", "boss"): decision(0, "worker", "boss", 0, swap=True),
        (1, "boss", "worker"): decision(1, "boss", "worker", 1, swap=True),
    }
    assert run_exchange_round(dyad, ok, suite) == {(0, "worker", "boss"): (1, 0), (1, "boss", "worker"): (1, 0)}
    mixed = dict(ok)
    mixed[(1, "boss", "worker")] = decision(1, "boss", "worker", 1, swap=False)
    assert run_exchange_round(dyad, mixed, suite) == {(0, "worker", "boss"): (0, 1), (1, "boss", "worker"): (0, 1)}
    with pytest.raises(ProtocolError):
        run_exchange_round(dyad, {(0, "worker", "boss"): ok[(0, "worker", "boss")]}, suite)


def test_tallies_additive(suite):
    star = society(4, [(0, 1), (0, 2), (0, 3)], [{"worker"}, {"boss"}, {"boss"}, {"boss"}])
    d = {(0, "worker", "boss"): decision(0, "worker", "boss", 1)}
    for j in (1, 2, 3):
        d[(j, "boss", "worker")] = decision(j, "boss", "worker", 1)
    lines = []
    t = run_exchange_round(star, d, suite, trace=lines.append)
    assert t[(0, "worker", "boss")] == (3, 0)
    assert len(lines) == 3 * 3
    assert lines[0] == "link=0:worker-1:boss hop=1 record=0:worker->1:boss w_np <w_np,b_np>"


def test_record_validation():
    with pytest.raises(ProtocolError):
        DecisionRecord(I, J, "w_p", ("w_np", "b_p"))
    assert CHistory().head is None
