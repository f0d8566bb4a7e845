"""Bandit policies over a K x L grid of Bernoulli-product arms.

All policies share a two-call protocol: ``select()`` returns the pair to
play, ``update(arm, reward)`` feeds back the binary reward for exactly
that pair.  Policies draw any internal randomness from their own
generator, never from the environment's, so a (policy seed, env seed)
pair fixes a run completely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from rank1bandit.klucb import kl_ucb_lower, kl_ucb_upper, kl_ucb_upper_many


class ProtocolError(RuntimeError):
    """select/update called out of order, past the horizon, or mismatched."""


def hoeffding_bounds(mu_hat: float, pulls: float, delta: float) -> tuple[float, float]:
    """Distribution-free interval mu_hat +- sqrt(delta / (2*pulls)), clipped to [0, 1]."""
    radius = math.sqrt(delta / (2.0 * pulls))
    return max(0.0, mu_hat - radius), min(1.0, mu_hat + radius)


def absorb_dominated(h: list[int], upper, leader: int, leader_lower: float) -> list[int]:
    """Re-point entries whose representative is dominated by the leader.

    ``h[i]`` is the representative currently standing in for index i;
    ``upper[r]`` the representative's upper confidence bound.  Any entry
    whose representative's upper bound is at or below the leader's lower
    bound (ties eliminate) is re-pointed at the leader, so stale pointers
    follow their representative out.
    """
    return [leader if upper[r] <= leader_lower else r for r in h]


class Policy:
    """Shared bookkeeping: horizon, step count, select/update pairing."""

    name = "policy"

    def __init__(self, K: int, L: int, horizon: int, rng: np.random.Generator):
        if int(K) != K or K < 1 or int(L) != L or L < 1:
            raise ValueError(f"K and L must be positive integers, got {K!r}, {L!r}")
        if int(horizon) != horizon or horizon < 5:
            raise ValueError(f"horizon must be an integer >= 5, got {horizon!r}")
        self.K = int(K)
        self.L = int(L)
        self.horizon = int(horizon)
        self.rng = rng
        self.t = 0
        self._pending: tuple[int, int] | None = None

    def select(self) -> tuple[int, int]:
        if self.t >= self.horizon:
            raise ProtocolError(f"select called after the horizon of {self.horizon} steps")
        if self._pending is not None:
            raise ProtocolError("select called again before update")
        arm = self._select()
        self._pending = arm
        return arm

    def update(self, arm: tuple[int, int], reward: int) -> None:
        if arm != self._pending:
            raise ProtocolError(f"update for {arm!r} but pending arm is {self._pending!r}")
        if reward != 0 and reward != 1:
            raise ValueError(f"reward must be 0 or 1, got {reward!r}")
        self._pending = None
        self.t += 1
        self._update(arm[0], arm[1], reward)

    def _select(self) -> tuple[int, int]:
        raise NotImplementedError

    def _update(self, i: int, j: int, reward: int) -> None:
        raise NotImplementedError


@dataclass
class StageRecord:
    """Snapshot taken at an elimination boundary, after re-pointing."""

    stage: int
    steps: int
    n_obs: int
    rows: tuple[int, ...]
    cols: tuple[int, ...]


class Rank1ElimKL(Policy):
    """Stagewise elimination on rows and columns with divergence intervals.

    Stage targets grow as ceil(16 * 4^stage * ln(horizon)) observations
    per surviving row and column.  Each round samples one column through
    the column redirection map and plays it against every surviving row,
    then samples one row and plays it against every surviving column.
    At a stage boundary each surviving mean estimate (total count divided
    by the stage target) gets a confidence interval with divergence
    budget ln(n) + 3*ln(ln(n)); anything whose upper bound does not
    exceed the best lower bound collapses onto the leader, and the count
    tables carry over unchanged.
    """

    name = "rank1elimkl"

    def __init__(self, K: int, L: int, horizon: int, rng: np.random.Generator):
        super().__init__(K, L, horizon, rng)
        log_n = math.log(self.horizon)
        self.budget = log_n + 3.0 * math.log(log_n)
        self._log_n = log_n
        self._C_u = [[0] * self.L for _ in range(self.K)]
        self._C_v = [[0] * self.L for _ in range(self.K)]
        self._h_u = list(range(self.K))
        self._h_v = list(range(self.L))
        self._rows = list(range(self.K))
        self._cols = list(range(self.L))
        self._stage = 0
        self._n_prev = 0
        self._n_target = math.ceil(16.0 * log_n)
        self._rounds_left = self._n_target
        self.stage_log: list[StageRecord] = []
        self._begin_round()

    # read-only views used by tests and experiment reports
    @property
    def remaining_rows(self) -> list[int]:
        return list(self._rows)

    @property
    def remaining_cols(self) -> list[int]:
        return list(self._cols)

    @property
    def row_map(self) -> list[int]:
        return list(self._h_u)

    @property
    def col_map(self) -> list[int]:
        return list(self._h_v)

    @property
    def stage(self) -> int:
        return self._stage

    def confidence_bounds(self, mu_hat: float, pulls: int) -> tuple[float, float]:
        return (
            kl_ucb_lower(mu_hat, pulls, self.budget),
            kl_ucb_upper(mu_hat, pulls, self.budget),
        )

    def _begin_round(self) -> None:
        j = int(self.rng.integers(self.L))
        self._cur_col = self._h_v[j]
        self._row_phase = True
        self._pos = 0

    def _select(self) -> tuple[int, int]:
        if self._row_phase:
            return (self._rows[self._pos], self._cur_col)
        return (self._cur_row, self._cols[self._pos])

    def _update(self, i: int, j: int, reward: int) -> None:
        pos = self._pos + 1
        if self._row_phase:
            if reward:
                self._C_u[i][j] += 1
            if pos < len(self._rows):
                self._pos = pos
                return
            r = int(self.rng.integers(self.K))
            self._cur_row = self._h_u[r]
            self._row_phase = False
            self._pos = 0
        else:
            if reward:
                self._C_v[i][j] += 1
            if pos < len(self._cols):
                self._pos = pos
                return
            self._rounds_left -= 1
            if self._rounds_left == 0:
                self._advance_stage()
            self._begin_round()

    def _advance_stage(self) -> None:
        n_obs = self._n_target
        u_hat = {}
        for i in self._rows:
            total = sum(self._C_u[i])
            assert total <= n_obs, f"row {i} holds {total} successes over {n_obs} observations"
            u_hat[i] = total / n_obs
        v_hat = {}
        for j in self._cols:
            total = sum(row[j] for row in self._C_v)
            assert total <= n_obs, f"column {j} holds {total} successes over {n_obs} observations"
            v_hat[j] = total / n_obs

        lower_u, upper_u, lower_v, upper_v = {}, {}, {}, {}
        for i in self._rows:
            lower_u[i], upper_u[i] = self.confidence_bounds(u_hat[i], n_obs)
        for j in self._cols:
            lower_v[j], upper_v[j] = self.confidence_bounds(v_hat[j], n_obs)

        row_leader = max(self._rows, key=lambda i: (lower_u[i], -i))
        col_leader = max(self._cols, key=lambda j: (lower_v[j], -j))
        self._h_u = absorb_dominated(self._h_u, upper_u, row_leader, lower_u[row_leader])
        self._h_v = absorb_dominated(self._h_v, upper_v, col_leader, lower_v[col_leader])
        self._rows = sorted(set(self._h_u))
        self._cols = sorted(set(self._h_v))

        self.stage_log.append(
            StageRecord(
                stage=self._stage,
                steps=self.t,
                n_obs=n_obs,
                rows=tuple(self._rows),
                cols=tuple(self._cols),
            )
        )
        self._stage += 1
        self._n_prev = n_obs
        self._n_target = math.ceil(16.0 * 4.0**self._stage * self._log_n)
        self._rounds_left = self._n_target - self._n_prev


class Rank1Elim(Rank1ElimKL):
    """Same elimination schedule with distribution-free intervals.

    Differs from the divergence variant only in how the per-stage
    confidence interval is formed: mean +- sqrt(budget / (2 * count)),
    clipped to the unit interval, with the same budget.
    """

    name = "rank1elim"

    def confidence_bounds(self, mu_hat: float, pulls: int) -> tuple[float, float]:
        return hoeffding_bounds(mu_hat, pulls, self.budget)


class UCB1(Policy):
    """Flat optimism over all K*L pairs.

    Plays every arm once in row-major order, then the arm maximizing
    mean + sqrt(2 ln(t) / count) with t the one-based step number, ties
    to the lowest flat index.
    """

    name = "ucb1"

    def __init__(self, K: int, L: int, horizon: int, rng: np.random.Generator):
        super().__init__(K, L, horizon, rng)
        n_arms = self.K * self.L
        self._n_arms = n_arms
        self._counts = np.zeros(n_arms)
        self._means = np.zeros(n_arms)
        self._sums = np.zeros(n_arms)
        self._inv_sqrt = np.zeros(n_arms)
        self._a = -1

    def _select(self) -> tuple[int, int]:
        t = self.t
        if t < self._n_arms:
            a = t
        else:
            width = math.sqrt(2.0 * math.log(t + 1))
            a = int(np.argmax(self._means + width * self._inv_sqrt))
        self._a = a
        return (a // self.L, a % self.L)

    def _update(self, i: int, j: int, reward: int) -> None:
        a = self._a
        c = self._counts[a] + 1.0
        self._counts[a] = c
        self._sums[a] += reward
        self._means[a] = self._sums[a] / c
        self._inv_sqrt[a] = 1.0 / math.sqrt(c)


class UCB1Elim(Policy):
    """Round-based elimination over the K*L flat arms.

    In round m every surviving arm is topped up to
    ceil(2 * ln(n * w^2) / w^2) total pulls, w = 2^-m; arms whose mean
    plus the round radius falls strictly below the best mean minus the
    radius are dropped, then w halves.  Rounds stop once n * w^2 would
    drop below e (the radius would lose meaning); after that the
    survivors are simply cycled.
    """

    name = "ucb1elim"

    def __init__(self, K: int, L: int, horizon: int, rng: np.random.Generator):
        super().__init__(K, L, horizon, rng)
        n_arms = self.K * self.L
        self._cands = list(range(n_arms))
        self._counts = [0] * n_arms
        self._sums = [0] * n_arms
        self._m = 0
        self._m_max = max(0, math.floor(0.5 * math.log2(self.horizon / math.e)))
        self._target = self.round_pull_target(self.horizon, 0)
        self._ptr = 0
        self._cycling = False

    @staticmethod
    def round_pull_target(horizon: int, m: int) -> int:
        """Cumulative pulls per surviving arm demanded by round m."""
        w2 = 4.0 ** (-m)
        return math.ceil(2.0 * math.log(horizon * w2) / w2)

    @property
    def remaining_arms(self) -> list[tuple[int, int]]:
        return [(a // self.L, a % self.L) for a in self._cands]

    def _select(self) -> tuple[int, int]:
        # invariant: outside cycling mode the pointer sits on a candidate
        # still short of the round target (rounds close eagerly in update)
        a = self._cands[self._ptr]
        self._a = a
        return (a // self.L, a % self.L)

    def _update(self, i: int, j: int, reward: int) -> None:
        a = self._a
        self._counts[a] += 1
        self._sums[a] += reward
        if self._cycling:
            self._ptr = (self._ptr + 1) % len(self._cands)
        elif self._counts[a] >= self._target:
            self._ptr += 1
            if self._ptr == len(self._cands):
                self._close_round()

    def _close_round(self) -> None:
        n_m = self._target
        radius = math.sqrt(math.log(self.horizon * 4.0 ** (-self._m)) / (2.0 * n_m))
        means = {a: self._sums[a] / self._counts[a] for a in self._cands}
        cutoff = max(means.values()) - radius
        self._cands = [a for a in self._cands if means[a] + radius >= cutoff]
        self._ptr = 0
        if self._m >= self._m_max:
            self._cycling = True
            return
        self._m += 1
        self._target = self.round_pull_target(self.horizon, self._m)


class KLUCB(Policy):
    """Flat divergence-based index policy over all K*L pairs.

    Anytime variant: after the initial sweep the arm with the largest
    upper confidence bound at divergence budget ln(t) + 3*ln(ln(t))
    (clamped at zero) is played.  Every step re-solves one bound per
    arm, so this baseline costs far more per step than the others.
    """

    name = "klucb"

    def __init__(self, K: int, L: int, horizon: int, rng: np.random.Generator):
        super().__init__(K, L, horizon, rng)
        n_arms = self.K * self.L
        self._n_arms = n_arms
        self._counts = np.zeros(n_arms)
        self._sums = np.zeros(n_arms)
        self._a = -1

    def _select(self) -> tuple[int, int]:
        t = self.t
        if t < self._n_arms:
            a = t
        else:
            t_now = t + 1
            log_t = math.log(t_now)
            budget = log_t + 3.0 * max(0.0, math.log(log_t))
            indices = kl_ucb_upper_many(self._sums / self._counts, self._counts, budget)
            a = int(np.argmax(indices))
        self._a = a
        return (a // self.L, a % self.L)

    def _update(self, i: int, j: int, reward: int) -> None:
        a = self._a
        self._counts[a] += 1.0
        self._sums[a] += reward


POLICIES: dict[str, type[Policy]] = {
    cls.name: cls for cls in (Rank1ElimKL, Rank1Elim, UCB1, UCB1Elim, KLUCB)
}


def make_policy(name: str, K: int, L: int, horizon: int, rng: np.random.Generator) -> Policy:
    """Instantiate a registered policy by name."""
    try:
        cls = POLICIES[name]
    except KeyError:
        raise ValueError(f"unknown policy {name!r} (choose from {sorted(POLICIES)})") from None
    return cls(K, L, horizon, rng)
