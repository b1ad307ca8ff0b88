"""Array-backed round loop shared by both learning methods.

Every per-link and per-unit quantity of a round is computed with numpy over
index arrays built once from the society. The object-level modules
(``protocol``, ``semantics``, ``learning``) define the same quantities one
item at a time and serve as the reference the tests compare against.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .games import GameSuite, best_joint_payoff, game_payoff
from .learning import EXPLOITATION, EXPLORATION, LearnerParams, max_plus
from .semantics import CorrespondenceMap, Decision, PreferenceFn
from .society import Society, role_pair_links

IRL = "irl"
CRL = "crl"


@dataclass
class RoundRecord:
    round: int  # 1-based
    epoch: int
    phase: str
    fraction_agreeing: float
    total_payoff: float
    total_reward: float
    payoff_bound: float
    positive: int
    negative: int
    violations: int


class Simulation:
    """One society learning under IRL or CRL.

    Units are (agent, role, context role) triples taking part in at least one
    role-pair link. All units of a run share one vocabulary size K; actions
    are ``corr * K + period`` over the K! coherent correspondences.
    """

    def __init__(
        self,
        soc: Society,
        suite: GameSuite,
        vocabularies: dict[str, tuple[str, ...]],
        params: LearnerParams,
        method: str = IRL,
        rng: np.random.Generator | None = None,
        crl_qstar: str = "coordinated",
        exploit_rounds: int = 50,
        prefs: PreferenceFn | None = None,
        quota: str = "per_epoch",
    ):
        if method not in (IRL, CRL):
            raise ConfigError("method", f"unknown method {method!r}")
        if crl_qstar not in ("coordinated", "best_response"):
            raise ConfigError("crl_qstar", f"unknown next-state value model {crl_qstar!r}")
        sizes = {len(vocabularies[r]) for r in soc.role_set if r in vocabularies}
        if len(sizes) != 1:
            raise ConfigError("vocabularies", "all roles must have vocabularies of one size")
        self.soc = soc
        self.suite = suite
        self.vocab = vocabularies
        self.params = params
        self.method = method
        self.crl_qstar = crl_qstar
        self.exploit_rounds = exploit_rounds
        if quota not in ("per_epoch", "cumulative"):
            raise ConfigError("quota", f"unknown trial quota {quota!r}")
        self.quota = quota
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.prefs = prefs or PreferenceFn.from_vocabularies(vocabularies)

        K = self.K = sizes.pop()
        self.perms = np.array(list(itertools.permutations(range(K))), dtype=np.int64)
        C = self.C = len(self.perms)
        A = self.A = C * K
        index = {tuple(p): c for c, p in enumerate(self.perms)}
        self.inverse = np.array([index[tuple(np.argsort(p))] for p in self.perms])
        self.next_state = np.arange(A) // K

        self.links = role_pair_links(soc, suite)
        units: dict[tuple[int, str, str], int] = {}
        for l in self.links:
            units.setdefault((l.a[0], l.a[1], l.b[1]), len(units))
            units.setdefault((l.b[0], l.b[1], l.a[1]), len(units))
        self.units = list(units)
        self.unit_index = units
        U = self.U = len(self.units)
        L = self.L = len(self.links)
        ars: dict[tuple[int, str], int] = {}
        for i, k, _ in self.units:
            ars.setdefault((i, k), len(ars))
        self.agent_roles = list(ars)
        self.unit_ar = np.array([ars[(i, k)] for i, k, _ in self.units], dtype=np.int64)
        self.unit_agent = np.array([i for i, _, _ in self.units], dtype=np.int64)
        self.ar_agent = np.array([i for i, _ in self.agent_roles], dtype=np.int64)
        self.n_ar = len(self.agent_roles)

        self.link_ua = np.array([units[(l.a[0], l.a[1], l.b[1])] for l in self.links], dtype=np.int64)
        self.link_ub = np.array([units[(l.b[0], l.b[1], l.a[1])] for l in self.links], dtype=np.int64)
        self.ar_links = np.bincount(self.unit_ar[self.link_ua], minlength=self.n_ar) + np.bincount(
            self.unit_ar[self.link_ub], minlength=self.n_ar
        )

        self.gamma = np.array(
            [[self.prefs(k, p) for p in vocabularies[k]] for _, k, _ in self.units]
        ).reshape(U, K)
        self.pay_a = np.zeros((L, K, K))
        self.pay_b = np.zeros((L, K, K))
        for n, l in enumerate(self.links):
            (_, ka), (_, kb) = l.a, l.b
            for x, pa in enumerate(vocabularies[ka]):
                for y, pb in enumerate(vocabularies[kb]):
                    self.pay_a[n, x, y], self.pay_b[n, x, y] = game_payoff(suite, (ka, pa), (kb, pb))
        self.link_best = np.array([best_joint_payoff(suite, *l.roles) for l in self.links])
        self.payoff_bound = float(self.link_best.sum())

        cu, cv, car = [], [], []
        by_ar: dict[int, list[int]] = {}
        for u, (i, k, m) in enumerate(self.units):
            by_ar.setdefault(ars[(i, k)], []).append(u)
        for ar, us in by_ar.items():
            for u, v in itertools.combinations(us, 2):
                if frozenset((self.units[u][2], self.units[v][2])) in soc.incompatible:
                    cu.append(u)
                    cv.append(v)
                    car.append(ar)
        self.cons_u = np.array(cu, dtype=np.int64)
        self.cons_v = np.array(cv, dtype=np.int64)
        self.cons_ar = np.array(car, dtype=np.int64)
        self.ar_cons = np.bincount(self.cons_ar, minlength=self.n_ar)
        # known constraint terms of an agent-role's utility, as pairwise factors
        # between two of its units for coordinated (CRL) selection
        same = (np.arange(A)[:, None] % K) == (np.arange(A)[None, :] % K)
        self.cons_factor = np.where(same, params.penalty_const, params.payoff_const)

        self.state = self.rng.integers(C, size=U)
        self.counts = np.zeros((U, C, A), dtype=np.int64)
        self._epoch_base = np.zeros_like(self.counts)
        if method == IRL:
            self.q = np.zeros((U, C, A))
        else:
            self.q = np.zeros((L, C, C, A, A))
        self.actions = np.zeros(U, dtype=np.int64)
        self.epoch = 0
        self.phase = EXPLORATION
        self._exploit_left = 0
        self.round = 0

    # decisions ------------------------------------------------------------

    def decisions(self) -> dict[tuple[int, str, str], Decision]:
        """Current actions as Decision objects keyed by unit."""
        out = {}
        for u, (i, k, m) in enumerate(self.units):
            a = int(self.actions[u])
            corr, per = divmod(a, self.K)
            mapping = {
                self.vocab[k][x]: self.vocab[m][int(self.perms[corr][x])] for x in range(self.K)
            }
            out[(i, k, m)] = Decision(
                (i, k), m, self.vocab[k][per], CorrespondenceMap.from_dict(k, m, mapping)
            )
        return out

    def _greedy(self) -> np.ndarray:
        if self.U == 0:
            return np.zeros(0, dtype=np.int64)
        if self.method == IRL:
            return np.argmax(self.q[np.arange(self.U), self.state], axis=1)
        return self._coordinated(self.state)

    def _coordinated(self, state) -> np.ndarray:
        """Joint greedy action of all units by max-plus over link tables and constraint factors."""
        tables = self.q[np.arange(self.L), state[self.link_ua], state[self.link_ub]]
        n_c = len(self.cons_u)
        factors = np.concatenate([tables, np.broadcast_to(self.cons_factor, (n_c, self.A, self.A))])
        var_a = np.concatenate([self.link_ua, self.cons_u])
        var_b = np.concatenate([self.link_ub, self.cons_v])
        return max_plus(factors, var_a, var_b, self.U)[0]

    def _crl_unit_rows(self, state, partner_actions) -> np.ndarray:
        """Per-unit sum over its links of the link table row, partners held at ``partner_actions``."""
        sa, sb = state[self.link_ua], state[self.link_ub]
        tables = self.q[np.arange(self.L), sa, sb]  # (L, A_a, A_b)
        rows_a = tables[np.arange(self.L), :, partner_actions[self.link_ub]]
        rows_b = tables[np.arange(self.L), partner_actions[self.link_ua], :]
        rows = np.zeros((self.U, self.A))
        np.add.at(rows, self.link_ua, rows_a)
        np.add.at(rows, self.link_ub, rows_b)
        return rows

    def _advance_phase(self):
        if self.phase == EXPLOITATION:
            if self._exploit_left > 0:
                return
            self.epoch += 1
            self.phase = EXPLORATION
            if self.quota == "per_epoch":
                self._epoch_base = self.counts.copy()
        if self.phase == EXPLORATION:
            thr = self.params.threshold(self.epoch)
            if (self.counts - self._epoch_base >= thr).all():
                self.phase = EXPLOITATION
                self._exploit_left = self.exploit_rounds

    def select(self) -> None:
        """Choose every unit's action for the coming round."""
        self._advance_phase()
        greedy = self._greedy()
        if self.phase == EXPLOITATION:
            self.actions = greedy
            self._exploit_left -= 1
        else:
            self.actions = self._explore(greedy)
        if self.U:
            self.counts[np.arange(self.U), self.state, self.actions] += 1

    def _explore(self, greedy) -> np.ndarray:
        U = self.U
        thr = self.params.threshold(self.epoch)
        counts = self.counts - self._epoch_base
        cur = counts[np.arange(U), self.state]  # (U, A)
        eligible = cur < thr
        here = eligible.any(axis=1)
        pending = (counts < thr).any(axis=2)  # (U, C)
        moving = pending[:, self.next_state]  # (U, A)
        eligible = np.where(here[:, None], eligible, moving)
        key = np.where(eligible, cur, np.iinfo(np.int64).max // 2).astype(float)
        key += self.rng.random(key.shape) * 0.5
        pick = np.argmin(key, axis=1)
        return np.where(eligible.any(axis=1), pick, greedy)

    # one round ------------------------------------------------------------

    def step(self) -> RoundRecord:
        """Play the selected actions, learn from them, and select the next ones."""
        K = self.K
        acts = self.actions
        corr, per = acts // K, acts % K
        ua, ub = self.link_ua, self.link_ub
        ca, cb, pa, pb = corr[ua], corr[ub], per[ua], per[ub]
        consistent = (self.perms[ca, pa] == pb) & (self.perms[cb, pb] == pa)
        pos = np.bincount(ua, consistent, self.U) + np.bincount(ub, consistent, self.U)
        neg = np.bincount(ua, ~consistent, self.U) + np.bincount(ub, ~consistent, self.U)

        li = np.arange(self.L)
        gain_a = self.pay_a[li, pa, pb]
        gain_b = self.pay_b[li, pa, pb]
        task = np.bincount(ua, gain_a, self.U) + np.bincount(ub, gain_b, self.U)

        violated = per[self.cons_u] == per[self.cons_v]
        v_ar = np.bincount(self.cons_ar, violated, self.n_ar)
        s_ar = self.ar_cons - v_ar
        p = self.params
        utility = (
            self.gamma[np.arange(self.U), per]
            + p.payoff_const * s_ar[self.unit_ar]
            + p.penalty_const * v_ar[self.unit_ar]
        )
        feedback = p.payoff_const * pos + p.penalty_const * neg
        reward = p.a_weight * utility + p.b_weight * feedback + task

        if self.method == IRL:
            self._irl_learn(reward, corr)
        else:
            self._crl_learn(reward, corr)
        self.state = corr

        link_ok = consistent & (self.inverse[ca] == cb) & (gain_a + gain_b > 0)
        bad = np.zeros(self.soc.n, dtype=bool)
        bad[self.unit_agent[ua[~link_ok]]] = True
        bad[self.unit_agent[ub[~link_ok]]] = True
        bad[self.ar_agent[v_ar > 0]] = True
        total = float(gain_a.sum() + gain_b.sum())
        if total > self.payoff_bound + 1e-9:
            raise AssertionError(f"round payoff {total} exceeds bound {self.payoff_bound}")
        self.round += 1
        rec = RoundRecord(
            round=self.round,
            epoch=self.epoch,
            phase=self.phase,
            fraction_agreeing=float(1.0 - bad.sum() / self.soc.n) if self.soc.n else 1.0,
            total_payoff=total,
            total_reward=float(reward.sum()),
            payoff_bound=self.payoff_bound,
            positive=int(consistent.sum()) * 2,
            negative=int((~consistent).sum()) * 2,
            violations=int(violated.sum()),
        )
        self.last_reward = reward
        self.last_feedback = (pos.astype(np.int64), neg.astype(np.int64))
        return rec

    def _irl_learn(self, reward, corr):
        u = np.arange(self.U)
        best_next = self.q[u, corr].max(axis=1)
        cur = self.q[u, self.state, self.actions]
        self.q[u, self.state, self.actions] = cur + self.params.alpha * (
            reward + self.params.delta * best_next - cur
        )

    def _crl_learn(self, reward, corr):
        p = self.params
        ua, ub = self.link_ua, self.link_ub
        li = np.arange(self.L)
        sa, sb = self.state[ua], self.state[ub]
        aa, ab = self.actions[ua], self.actions[ub]
        qv = self.q[li, sa, sb, aa, ab]
        ar_a, ar_b = self.unit_ar[ua], self.unit_ar[ub]
        q_loc = 0.5 * (np.bincount(ar_a, qv, self.n_ar) + np.bincount(ar_b, qv, self.n_ar))
        if self.crl_qstar == "coordinated":
            best = self._coordinated(corr)
            nv = self.q[li, corr[ua], corr[ub], best[ua], best[ub]]
            q_star = 0.5 * (np.bincount(ar_a, nv, self.n_ar) + np.bincount(ar_b, nv, self.n_ar))
        else:
            rows = self._crl_unit_rows(corr, self.actions)
            q_star = 0.5 * np.bincount(self.unit_ar, rows.max(axis=1), self.n_ar)
        r_ar = np.bincount(self.unit_ar, reward, self.n_ar)
        term = (r_ar + p.delta * q_star - q_loc) / np.maximum(self.ar_links, 1)
        self.q[li, sa, sb, aa, ab] = qv + p.alpha * (term[ar_a] + term[ar_b])


def check_convergence(fractions, phases, threshold: float, window: int = 10):
    """Earliest 1-based round ending ``window`` consecutive exploitation rounds at or above ``threshold``."""
    if window < 1:
        raise ConfigError("convergence.window", "window must be >= 1")
    streak = 0
    for r, (f, ph) in enumerate(zip(fractions, phases), 1):
        if ph == EXPLOITATION and f >= threshold - 1e-12:
            streak += 1
            if streak >= window:
                return r
        else:
            streak = 0
    return None
