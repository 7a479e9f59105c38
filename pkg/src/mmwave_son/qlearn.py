"""Per-cluster transmit power selection with independent tabular Q-learning.

Every station in a cluster is one agent. Its state is the ring index of
its distance to the cluster head (static per cluster), its actions are a
uniform grid of dBm power levels, and all agents act simultaneously each
episode against the powers the whole cluster just picked. Interference
during training comes from cluster mates only.

The update keeps the bootstrap on the action just taken,

    Q(s, a) <- (1 - alpha) Q(s, a) + alpha (R + gamma Q(s', a)),

so with a static state each visited cell contracts toward R / (1 - gamma).
A conventional max bootstrap is available behind ``update_rule="max"`` but
is not the default.

Two reward shapes are built in, both driven by capacity C = log2(1 + SINR)
against the QoS floor q (linear SINR):

* ``cdpq``: piecewise linear, (C - |C - 2 log2 q|) / (2 log2 q). Worth -1
  at C = 0, 0 at C = log2 q, and saturating at 1 for C >= 2 log2 q, which
  removes any incentive to push power past twice the QoS capacity.
* ``expq``: saturating exponential 1 - exp(-shape (C - log2 q)), strictly
  increasing in C; the comparison baseline.

Greedy selection treats Q-values within ``greedy_tol`` of the row maximum
as tied and takes the lowest such index, i.e. the smallest power. Visited
cells approach their fixed points from below at slightly different
residuals, so exact float argmax would resolve saturated-reward ties by
visit count rather than by power; the tolerance is far below any real
per-level Q gap (~1 unit near the plateau) and far above the residual
spread at the early-stopping point (~1e-4).

Agents exchange their current Q-rows with cluster mates once per episode
(a synchronous barrier). Receipt is counted and the last received rows are
kept on the run record, but selection and updates never read them; each
agent learns purely from its own experience.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import capacity, dbm_to_mw, sinr_all


@dataclass(frozen=True)
class ActionGrid:
    """Uniformly spaced transmit power levels in dBm."""

    levels_dbm: np.ndarray

    @classmethod
    def uniform(cls, p_min_dbm, p_max_dbm, n_power):
        if n_power < 2:
            raise ValueError("need at least two power levels")
        if p_min_dbm >= p_max_dbm:
            raise ValueError("p_min_dbm must be below p_max_dbm")
        grid = cls(np.linspace(p_min_dbm, p_max_dbm, n_power))
        grid.levels_dbm.flags.writeable = False
        return grid

    @property
    def n(self):
        return len(self.levels_dbm)


@dataclass(frozen=True)
class RewardSpec:
    kind: str  # "cdpq" | "expq"
    qos_sinr: float
    shape: float = 1.0

    def validate(self):
        if self.kind not in ("cdpq", "expq"):
            raise ValueError("reward kind must be 'cdpq' or 'expq'")
        if self.qos_sinr <= 1.0:
            raise ValueError("qos_sinr must exceed 1 (log2 target must be positive)")
        if self.kind == "expq" and self.shape <= 0:
            raise ValueError("expq shape must be positive")
        return self

    def reward(self, capacity_bits):
        if self.kind == "cdpq":
            return reward_cdpq(capacity_bits, self.qos_sinr)
        return reward_expq(capacity_bits, self.qos_sinr, self.shape)


def reward_cdpq(capacity_bits, qos_sinr):
    """Plateau reward: -1 at zero capacity, 0 at the QoS capacity, 1 beyond
    twice the QoS capacity."""
    c = np.asarray(capacity_bits, dtype=float)
    target2 = 2.0 * np.log2(qos_sinr)
    return (c - np.abs(c - target2)) / target2


def reward_expq(capacity_bits, qos_sinr, shape=1.0):
    """Exponential reward, strictly increasing in capacity toward 1."""
    c = np.asarray(capacity_bits, dtype=float)
    return 1.0 - np.exp(-shape * (c - np.log2(qos_sinr)))


@dataclass(frozen=True)
class LearningConfig:
    n_power: int = 31
    ring_width_m: float = 50.0
    n_rings: int = 4
    alpha: float = 0.5
    gamma: float = 0.9
    episodes_max: int = 50_000
    epsilon0: float = 0.5
    epsilon_decay_fraction: float = 0.8
    q_init_scale: float = 0.01
    greedy_tol: float = 0.01
    early_stop_delta: float = 1e-5
    early_stop_patience: int = 500
    trace_every: int = 100  # 0 logs only the final episode
    update_rule: str = "same-action"  # or "max"

    def validate(self):
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must be in (0, 1]")
        if not 0 <= self.gamma < 1:
            raise ValueError("gamma must be in [0, 1)")
        if self.n_rings < 1 or self.ring_width_m <= 0:
            raise ValueError("need n_rings >= 1 and positive ring_width_m")
        if self.episodes_max < 1:
            raise ValueError("episodes_max must be >= 1")
        if not 0 <= self.epsilon0 <= 1:
            raise ValueError("epsilon0 must be in [0, 1]")
        if not 0 <= self.epsilon_decay_fraction <= 1:
            raise ValueError("epsilon_decay_fraction must be in [0, 1]")
        if self.update_rule not in ("same-action", "max"):
            raise ValueError("update_rule must be 'same-action' or 'max'")
        if self.greedy_tol < 0 or self.q_init_scale < 0:
            raise ValueError("greedy_tol and q_init_scale must be >= 0")
        return self

    def epsilon(self, episode):
        """Linear decay from epsilon0 to zero over the first
        epsilon_decay_fraction of the episode budget."""
        horizon = self.epsilon_decay_fraction * self.episodes_max
        if horizon <= 0:
            return 0.0
        return self.epsilon0 * max(0.0, 1.0 - episode / horizon)


def ring_state(distance_m, ring_width_m, n_rings):
    """Ring index of a head distance; the outermost ring absorbs overflow."""
    if distance_m < 0:
        raise ValueError("distance must be >= 0")
    return min(int(distance_m // ring_width_m), n_rings - 1)


def greedy_action(qrow, tol=0.0):
    """Lowest index whose value is within tol of the row maximum."""
    row = np.asarray(qrow, dtype=float)
    return int(np.argmax(row >= row.max() - tol))


def select_action(qtable, state, epsilon, rng, tol=0.0):
    """Epsilon-greedy pick from one table row."""
    if rng.random() < epsilon:
        return int(rng.integers(qtable.shape[1]))
    return greedy_action(qtable[state], tol)


def q_update(qtable, state, action, reward, next_state, alpha, gamma,
             rule="same-action"):
    """One tabular update; returns the new cell value.

    The default bootstraps on the next state's value of the action just
    taken; "max" bootstraps on the next state's row maximum.
    """
    if rule == "same-action":
        bootstrap = qtable[next_state, action]
    elif rule == "max":
        bootstrap = qtable[next_state].max()
    else:
        raise ValueError("unknown update rule %r" % rule)
    qtable[state, action] = (1.0 - alpha) * qtable[state, action] + alpha * (
        reward + gamma * bootstrap
    )
    return qtable[state, action]


@dataclass
class RunRecord:
    """Training trace of one cluster.

    rows holds (episode, bs_id, ring, action_dbm, sinr_db, capacity,
    reward) tuples, thinned to every trace_every-th episode plus the last
    one executed.
    """

    cluster_id: int
    episodes_run: int = 0
    early_stopped: bool = False
    rows: list = field(default_factory=list)
    final_actions: dict = field(default_factory=dict)
    final_powers_dbm: dict = field(default_factory=dict)
    q_exchange_messages: int = 0
    last_shared_rows: dict = field(default_factory=dict)


@dataclass
class TrainResult:
    cluster_id: int
    agent_ids: list
    rings: dict
    qtables: dict
    actions: dict
    powers_dbm: dict
    record: RunRecord


def greedy_power_vector(qtables, rings, grid, tol=0.0):
    """Extract each agent's greedy power from its table row."""
    actions = {}
    powers = {}
    for agent_id in sorted(qtables):
        a = greedy_action(qtables[agent_id][rings[agent_id]], tol)
        actions[agent_id] = a
        powers[agent_id] = float(grid.levels_dbm[a])
    return actions, powers


def train_cluster(cluster, layout, gains, channel_params, reward_spec, config,
                  seed):
    """Train one cluster's agents to a greedy power vector.

    cluster: a floc.Cluster (head plus banded members).
    gains: full-network GainMatrix; the cluster's submatrix drives SINR,
        so training interference is cluster-internal by construction.
    seed: combined with the head id so per-cluster streams are independent
        of training order; parallel and sequential schedules match bitwise.
    """
    config.validate()
    reward_spec.validate()
    ids = sorted(cluster.ids())
    n_agents = len(ids)
    grid = ActionGrid.uniform(
        channel_params.p_min_dbm, channel_params.p_max_dbm, config.n_power
    )
    bs_xy = layout.bs_positions()
    head_xy = bs_xy[cluster.head]
    rings = {}
    for i in ids:
        d = float(np.hypot(*(bs_xy[i] - head_xy)))
        rings[i] = ring_state(d, config.ring_width_m, config.n_rings)
    ring_arr = np.array([rings[i] for i in ids])

    h = gains.submatrix(ids)
    noise_mw = float(dbm_to_mw(channel_params.noise_dbm))
    levels = grid.levels_dbm

    rng = np.random.default_rng([seed, cluster.head])
    q = config.q_init_scale * rng.random((n_agents, config.n_rings, config.n_power))

    record = RunRecord(cluster_id=cluster.head)
    idx = np.arange(n_agents)
    streak = 0
    episode = -1

    def log_rows(ep, acts, sinrs, caps, rewards):
        p = levels[acts]
        sinr_db = 10.0 * np.log10(sinrs)
        for j, agent in enumerate(ids):
            record.rows.append(
                (
                    ep,
                    agent,
                    int(ring_arr[j]),
                    float(p[j]),
                    float(sinr_db[j]),
                    float(caps[j]),
                    float(rewards[j]),
                )
            )

    last = None
    for episode in range(config.episodes_max):
        eps = config.epsilon(episode)
        rows_now = q[idx, ring_arr]
        cutoff = rows_now.max(axis=1) - config.greedy_tol
        greedy = np.argmax(rows_now >= cutoff[:, None], axis=1)
        explore = rng.random(n_agents) < eps
        randoms = rng.integers(0, config.n_power, n_agents)
        acts = np.where(explore, randoms, greedy)

        p_dbm = levels[acts]
        sinrs = sinr_all(p_dbm, h, noise_mw)
        caps = capacity(sinrs)
        rewards = np.asarray(reward_spec.reward(caps), dtype=float)

        old = q[idx, ring_arr, acts]
        if config.update_rule == "same-action":
            bootstrap = old  # next state is the same static state
        else:
            bootstrap = rows_now.max(axis=1)
        new = (1.0 - config.alpha) * old + config.alpha * (
            rewards + config.gamma * bootstrap
        )
        q[idx, ring_arr, acts] = new

        # synchronous row exchange; received rows are logged, never read
        record.q_exchange_messages += n_agents * (n_agents - 1)

        last = (episode, acts.copy(), sinrs, caps, rewards)
        if config.trace_every and episode % config.trace_every == 0:
            log_rows(*last)
            last = None

        delta = float(np.abs(new - old).max())
        streak = streak + 1 if delta < config.early_stop_delta else 0
        if streak >= config.early_stop_patience:
            record.early_stopped = True
            break

    if last is not None:
        log_rows(*last)
    record.episodes_run = episode + 1
    for j, agent in enumerate(ids):
        record.last_shared_rows[agent] = q[j, ring_arr[j]].copy()

    qtables = {agent: q[j].copy() for j, agent in enumerate(ids)}
    actions, powers = greedy_power_vector(qtables, rings, grid, config.greedy_tol)
    record.final_actions = dict(actions)
    record.final_powers_dbm = dict(powers)
    return TrainResult(
        cluster_id=cluster.head,
        agent_ids=ids,
        rings=rings,
        qtables=qtables,
        actions=actions,
        powers_dbm=powers,
        record=record,
    )
