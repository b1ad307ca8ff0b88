import pytest

from contextnorms.games import default_suite
from contextnorms.semantics import CorrespondenceMap, Decision, default_vocabularies
from contextnorms.society import Society

VOCAB = default_vocabularies()


def corr(src, dst, swap=False):
    """Identity (p->p, np->np) or swapped map between two default vocabularies."""
    a, b = VOCAB[src], VOCAB[dst]
    image = tuple(reversed(b)) if swap else b
    return CorrespondenceMap.from_dict(src, dst, dict(zip(a, image)))


def decision(agent, role, target, period, swap=False):
    """``period`` is 0 (preferred) or 1 (non-preferred)."""
    return Decision((agent, role), target, VOCAB[role][period], corr(role, target, swap))


def society(n, edges, roles):
    return Society(n, tuple(sorted(tuple(sorted(e)) for e in edges)), tuple(frozenset(r) for r in roles))


@pytest.fixture
def suite():
    return default_suite()


@pytest.fixture
def dyad():
    return society(2, [(0, 1)], [{"worker"}, {"boss"}])


_CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Record one pass/fail line for an acceptance criterion."""

    def record(label, ok, detail):
        line = f"criterion {label}: {'PASS' if ok else 'FAIL'} ({detail})"
        _CRITERIA.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
