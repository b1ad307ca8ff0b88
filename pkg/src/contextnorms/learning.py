"""Reward composition, action selection and the two Q-learning updates.

A learnable unit is one (agent, role, context role) triple. Its state is the
index of the correspondence it currently holds; an action is the pair
(correspondence, period) encoded as ``corr * K + period`` with K the
vocabulary size, so taking action ``a`` moves the unit to state ``a // K``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .errors import ParameterError
from .semantics import PAYOFF, PENALTY

EXPLORATION = "exploration"
EXPLOITATION = "exploitation"


@dataclass(frozen=True)
class LearnerParams:
    alpha: float = 0.5
    delta: float = 0.0
    a_weight: float = 0.1
    b_weight: float = 1.0
    payoff_const: float = PAYOFF
    penalty_const: float = PENALTY
    epoch0_trials: int = 1
    trials_increment: int = 1

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ParameterError(f"alpha must be in (0, 1], got {self.alpha}")
        if not 0.0 <= self.delta <= 1.0:
            raise ParameterError(f"delta must be in [0, 1], got {self.delta}")
        if self.payoff_const <= 0 or self.penalty_const >= 0:
            raise ParameterError("payoff_const must be positive and penalty_const negative")
        if self.epoch0_trials < 1 or self.trials_increment < 0:
            raise ParameterError("epoch0_trials >= 1 and trials_increment >= 0 required")

    def threshold(self, epoch: int) -> int:
        """Visits every (state, action) needs before exploration of ``epoch`` ends."""
        return self.epoch0_trials + epoch * self.trials_increment

    def as_dict(self) -> dict:
        return asdict(self)


def compute_feedback_value(pos, neg, payoff_const=PAYOFF, penalty_const=PENALTY):
    return payoff_const * pos + penalty_const * neg


def compute_reward(utility, feedback, task_payoff, params: LearnerParams):
    """a * U + b * (payoff * positives + penalty * negatives) + task payoff."""
    pos, neg = feedback
    fb = compute_feedback_value(pos, neg, params.payoff_const, params.penalty_const)
    return params.a_weight * utility + params.b_weight * fb + task_payoff


def irl_update(q: np.ndarray, s: int, c: int, r: float, s_next: int, alpha: float, delta: float) -> float:
    """One Q-learning step on a unit's (states x actions) table, in place."""
    target = r + delta * q[s_next].max()
    q[s, c] += alpha * (target - q[s, c])
    return q[s, c]


def crl_delta(rewards, q_star, q_loc, degrees, alpha: float, delta: float) -> float:
    """Edge increment: alpha * sum over both endpoints of (r + delta*Q* - Q_local) / |links|."""
    total = 0.0
    for r, qs, ql, n in zip(rewards, q_star, q_loc, degrees):
        if n < 1:
            raise ParameterError("each endpoint needs at least one incident link")
        total += (r + delta * qs - ql) / n
    return alpha * total


def crl_update(table: np.ndarray, index, rewards, q_star, q_loc, degrees, alpha, delta) -> float:
    """Apply :func:`crl_delta` to ``table[index]`` in place and return the new entry."""
    table[index] += crl_delta(rewards, q_star, q_loc, degrees, alpha, delta)
    return table[index]


def local_q_value(link_values: Sequence[float]) -> float:
    """Half the sum of the link values an agent-role takes part in."""
    return 0.5 * float(sum(link_values))


def best_local_joint(rows, units, partner_actions=None):
    """Best own action per unit across an agent-role's incident links.

    ``rows[l]`` is link ``l``'s table at the current joint state, oriented
    (own action, partner action); ``units[l]`` names the unit that decides on
    that link. With ``partner_actions`` the partner is held at its given
    action, otherwise each link contributes its best value over the partner.
    Returns ``({unit: action}, half-sum value)``; ties go to the lowest action.
    """
    sums: dict = {}
    for l, (row, unit) in enumerate(zip(rows, units)):
        row = np.asarray(row, dtype=float)
        v = row[:, partner_actions[l]] if partner_actions is not None else row.max(axis=1)
        sums[unit] = sums[unit] + v if unit in sums else v.copy()
    choice = {u: int(np.argmax(v)) for u, v in sums.items()}
    value = 0.5 * sum(float(v[choice[u]]) for u, v in sums.items())
    return choice, value


def max_plus(factors, var_a, var_b, n_vars, iterations=30, damping=0.5):
    """Anytime max-plus over a pairwise coordination graph.

    ``factors[e]`` is an (A, A) table over the actions of variables
    ``var_a[e]`` (rows) and ``var_b[e]`` (columns). Messages are passed in
    parallel along every factor, damped and mean-normalised each sweep; the
    joint action with the highest total factor value seen across sweeps is
    kept. Returns ``(actions, value)``. Deterministic given its inputs;
    ties go to the lowest action index.
    """
    factors = np.asarray(factors, dtype=float)
    var_a = np.asarray(var_a, dtype=np.int64)
    var_b = np.asarray(var_b, dtype=np.int64)
    E = factors.shape[0]
    if E == 0:
        return np.zeros(n_vars, dtype=np.int64), 0.0
    A = factors.shape[1]
    edges = np.arange(E)
    m_ab = np.zeros((E, A))  # a -> b, indexed by b's action
    m_ba = np.zeros((E, A))  # b -> a, indexed by a's action

    def incoming():
        inc = np.empty((n_vars, A))
        for k in range(A):
            inc[:, k] = np.bincount(var_b, m_ab[:, k], n_vars) + np.bincount(var_a, m_ba[:, k], n_vars)
        return inc

    def rowmax(m, axis):
        # explicit pairwise maxima beat ndarray.max on tiny trailing axes
        out = m.take(0, axis=axis).copy()
        for k in range(1, A):
            np.maximum(out, m.take(k, axis=axis), out=out)
        return out

    def total(x):
        return float(factors[edges, x[var_a], x[var_b]].sum())

    inc = incoming()
    best = np.argmax(inc, axis=1)
    best_value = total(best)
    for _ in range(iterations):
        h_a = inc[var_a] - m_ba
        h_b = inc[var_b] - m_ab
        new_ab = rowmax(factors + h_a[:, :, None], 1)
        new_ba = rowmax(factors + h_b[:, None, :], 2)
        new_ab -= new_ab.sum(axis=1, keepdims=True) / A
        new_ba -= new_ba.sum(axis=1, keepdims=True) / A
        new_ab = damping * m_ab + (1.0 - damping) * new_ab
        new_ba = damping * m_ba + (1.0 - damping) * new_ba
        settled = np.abs(new_ab - m_ab).max() < 1e-9 and np.abs(new_ba - m_ba).max() < 1e-9
        m_ab, m_ba = new_ab, new_ba
        inc = incoming()
        x = np.argmax(inc, axis=1)
        v = total(x)
        if v > best_value + 1e-12:
            best, best_value = x, v
        if settled:
            break
    return best, best_value


def exploration_candidates(counts: np.ndarray, state: int, threshold: int, next_state: np.ndarray):
    """Actions eligible during exploration, or an empty array once the unit is done.

    Prefers under-tried actions of the current state; otherwise actions that
    move to a state that still has under-tried actions.
    """
    row = counts[state]
    deficit = np.flatnonzero(row < threshold)
    if deficit.size:
        return deficit
    pending = (counts < threshold).any(axis=1)
    return np.flatnonzero(pending[next_state])


def select_decision(counts, state, epoch, phase, q_row, rng, params: LearnerParams, next_state=None):
    """Pick an action index for one unit.

    Exploration takes the least-visited eligible action with ties broken by
    ``rng``; a unit that has met the epoch's threshold everywhere, and every
    unit during exploitation, takes ``argmax q_row`` (lowest index on ties).
    """
    counts = np.asarray(counts)
    n_actions = counts.shape[1]
    if next_state is None:
        k = n_actions // counts.shape[0]
        next_state = np.arange(n_actions) // k
    if phase == EXPLORATION:
        cand = exploration_candidates(counts, state, params.threshold(epoch), next_state)
        if cand.size:
            row = counts[state, cand]
            least = cand[row == row.min()]
            return int(least[rng.integers(least.size)])
    return int(np.argmax(q_row))
